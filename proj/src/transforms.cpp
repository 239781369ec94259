#include "skelfreq/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "skelfreq/log.hpp"

namespace skelfreq {

std::shared_ptr<const ComplexMatrix> dft_matrix(std::size_t frames) {
  require(frames >= 1, ErrorKind::parameter, "DFT length must be at least 1");
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const ComplexMatrix>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(frames); it != cache.end()) return it->second;

  auto w = std::make_shared<ComplexMatrix>(frames, frames);
  for (std::size_t j = 0; j < frames; ++j) {
    for (std::size_t k = 0; k < frames; ++k) {
      // reduce jk mod T first so large exponents keep full precision
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % frames) /
                           static_cast<double>(frames);
      w->set(j, k, {std::cos(angle), std::sin(angle)});
    }
  }
  cache.emplace(frames, w);
  return w;
}

namespace {

std::shared_ptr<const ComplexMatrix> inverse_dft_matrix(std::size_t frames) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const ComplexMatrix>> cache;
  const auto w = dft_matrix(frames);
  std::lock_guard lock(mutex);
  if (auto it = cache.find(frames); it != cache.end()) return it->second;
  auto inv = std::make_shared<ComplexMatrix>(frames, frames);
  const double scale = 1.0 / static_cast<double>(frames);
  for (std::size_t j = 0; j < frames; ++j)
    for (std::size_t k = 0; k < frames; ++k) inv->set(j, k, std::conj((*w)(j, k)) * scale);
  cache.emplace(frames, inv);
  return inv;
}

void check_basis(std::size_t rows, const GraphSpectrumBasis& basis) {
  require(rows == basis.size(), ErrorKind::shape,
          "signal has " + std::to_string(rows) + " nodes but basis has dimension " + std::to_string(basis.size()));
}

}  // namespace

Matrix gft(const SpatioTemporalSignal& signal, const GraphSpectrumBasis& basis) {
  check_basis(signal.rows(), basis);
  return multiply_transposed_left(basis.eigenvectors, signal);
}

Matrix igft(const Matrix& graph_spectrum, const GraphSpectrumBasis& basis) {
  check_basis(graph_spectrum.rows(), basis);
  return multiply(basis.eigenvectors, graph_spectrum);
}

ComplexMatrix dft(const Matrix& signal) {
  require(signal.cols() >= 1, ErrorKind::shape, "DFT needs at least one frame");
  const auto w = dft_matrix(signal.cols());
  // X·W computed row by row: out_row += x_t * W_row(t)
  return multiply(signal, *w);
}

ComplexMatrix dft(const ComplexMatrix& signal) {
  require(signal.cols() >= 1, ErrorKind::shape, "DFT needs at least one frame");
  return multiply(signal, *dft_matrix(signal.cols()));
}

ComplexMatrix idft(const ComplexMatrix& spectrum) {
  require(spectrum.cols() >= 1, ErrorKind::shape, "inverse DFT needs at least one bin");
  return multiply(spectrum, *inverse_dft_matrix(spectrum.cols()));
}

JointSpectrum jft(const SpatioTemporalSignal& signal, const GraphSpectrumBasis& basis) {
  return {dft(gft(signal, basis)), basis.id()};
}

ComplexMatrix ijft_complex(const ComplexMatrix& spectrum, const GraphSpectrumBasis& basis) {
  check_basis(spectrum.rows(), basis);
  return idft(multiply(basis.eigenvectors, spectrum));
}

SpatioTemporalSignal ijft(const JointSpectrum& spectrum, const GraphSpectrumBasis& basis) {
  const auto full = ijft_complex(spectrum.values, basis);
  Matrix re = full.real();
  const Matrix im = full.imag();
  double peak = 1.0;
  for (const double v : re.values()) peak = std::max(peak, std::abs(v));
  double residue = 0.0;
  for (const double v : im.values()) residue = std::max(residue, std::abs(v));
  residue /= peak;
  if (residue > 1e-6) {
    std::ostringstream msg;
    msg << "inverse JFT has imaginary residue " << residue << " (spectrum is not conjugate-symmetric)";
    fail(ErrorKind::numeric, msg.str());
  }
  if (residue > 1e-9) {
    std::ostringstream msg;
    msg << "inverse JFT dropped imaginary residue " << residue;
    warn(msg.str());
  }
  return re;
}

std::size_t SpectralMask::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(diagonal.begin(), diagonal.end(), std::uint8_t{1}));
}

std::string SpectralMask::describe() const {
  std::string out = axis == MaskAxis::spatial ? "spatial-" : "temporal-";
  out += kind == MaskKind::low ? "low-" : "high-";
  out += std::to_string(bandwidth);
  return out;
}

std::size_t temporal_levels(std::size_t frames) { return frames / 2 + 1; }

SpectralMask make_mask(MaskAxis axis, MaskKind kind, std::size_t bandwidth, std::size_t size) {
  require(size >= 1, ErrorKind::parameter, "mask size must be positive");
  SpectralMask mask{axis, kind, bandwidth, std::vector<std::uint8_t>(size, 0)};
  if (axis == MaskAxis::spatial) {
    require(bandwidth >= 1 && bandwidth <= size, ErrorKind::parameter,
            "spatial bandwidth " + std::to_string(bandwidth) + " outside [1, " + std::to_string(size) + "]");
    for (std::size_t i = 0; i < bandwidth; ++i) {
      const std::size_t idx = kind == MaskKind::low ? size - 1 - i : i;
      mask.diagonal[idx] = 1;
    }
    return mask;
  }
  const std::size_t levels = temporal_levels(size);
  require(bandwidth >= 1 && bandwidth <= levels, ErrorKind::parameter,
          "temporal bandwidth " + std::to_string(bandwidth) + " outside [1, " + std::to_string(levels) + "]");
  for (std::size_t l = 0; l < size; ++l) {
    const std::size_t level = std::min(l, size - l);
    const bool keep = kind == MaskKind::low ? level < bandwidth : level + bandwidth >= levels;
    mask.diagonal[l] = keep ? 1 : 0;
  }
  return mask;
}

SpatioTemporalSignal apply_filter(const SpatioTemporalSignal& signal, const GraphSpectrumBasis& basis,
                                  const std::optional<SpectralMask>& spatial,
                                  const std::optional<SpectralMask>& temporal) {
  check_basis(signal.rows(), basis);
  Matrix out = signal;
  if (spatial) {
    require(spatial->axis == MaskAxis::spatial && spatial->size() == signal.rows(), ErrorKind::shape,
            "spatial mask does not match node count");
    Matrix coeffs = gft(out, basis);
    for (std::size_t k = 0; k < coeffs.rows(); ++k) {
      if (spatial->diagonal[k] == 0) std::fill(coeffs.row(k).begin(), coeffs.row(k).end(), 0.0);
    }
    out = igft(coeffs, basis);
  }
  if (temporal) {
    require(temporal->axis == MaskAxis::temporal && temporal->size() == signal.cols(), ErrorKind::shape,
            "temporal mask does not match frame count");
    ComplexMatrix bins = dft(out);
    for (std::size_t r = 0; r < bins.rows(); ++r)
      for (std::size_t l = 0; l < bins.cols(); ++l)
        if (temporal->diagonal[l] == 0) bins.set(r, l, 0.0);
    out = idft(bins).real();
  }
  return out;
}

double out_of_band_energy_fraction(const JointSpectrum& spectrum, const std::optional<SpectralMask>& spatial,
                                   const std::optional<SpectralMask>& temporal) {
  const auto& v = spectrum.values;
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t k = 0; k < v.rows(); ++k) {
    const bool row_in = !spatial || spatial->diagonal.at(k) != 0;
    for (std::size_t l = 0; l < v.cols(); ++l) {
      const bool col_in = !temporal || temporal->diagonal.at(l) != 0;
      const double e = std::norm(v(k, l));
      total += e;
      if (!(row_in && col_in)) outside += e;
    }
  }
  return total > 0.0 ? outside / total : 0.0;
}

}  // namespace skelfreq
