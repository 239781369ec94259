#include "skelfreq/perturbations.hpp"

#include <cmath>

#include "skelfreq/rng.hpp"

namespace skelfreq {

SpatioTemporalSignal band_limited_noise(std::size_t nodes, std::size_t frames, const GraphSpectrumBasis& basis,
                                        const std::optional<SpectralMask>& spatial,
                                        const std::optional<SpectralMask>& temporal, double target_norm,
                                        std::uint64_t seed) {
  require(target_norm > 0.0 && std::isfinite(target_norm), ErrorKind::parameter, "target norm must be positive");
  require(nodes == basis.size(), ErrorKind::shape, "noise size does not match basis");
  if (spatial) require(spatial->popcount() > 0, ErrorKind::parameter, "spatial mask is all zero");
  if (temporal) require(temporal->popcount() > 0, ErrorKind::parameter, "temporal mask is all zero");

  Rng rng(seed);
  Matrix white(nodes, frames);
  for (double& x : white.values()) x = rng.normal();
  Matrix filtered = apply_filter(white, basis, spatial, temporal);
  const double norm = frobenius_norm(filtered);
  require(norm > 0.0, ErrorKind::parameter, "filtered noise vanished; mask passband is empty");
  return (target_norm / norm) * filtered;
}

SpatioTemporalSignal fourier_basis_perturbation(std::size_t k, std::size_t l, const GraphSpectrumBasis& basis,
                                                std::size_t frames) {
  const std::size_t N = basis.size();
  require(k >= 1 && k <= N, ErrorKind::parameter, "spatial index k must lie in [1, N]");
  require(frames >= 1 && l < frames, ErrorKind::parameter, "temporal index l must lie in [0, T)");
  JointSpectrum spectrum{ComplexMatrix(N, frames), basis.id()};
  spectrum.values.set(k - 1, l, 1.0);
  spectrum.values.set(k - 1, (frames - l) % frames, 1.0);
  Matrix f = ijft(spectrum, basis);
  return (1.0 / frobenius_norm(f)) * f;
}

double perturbation_sign(std::uint64_t seed) { return Rng(seed).sign(); }

SpatioTemporalSignal perturb_with_basis(const SpatioTemporalSignal& signal, const SpatioTemporalSignal& direction,
                                        double v, std::uint64_t seed) {
  require(signal.same_shape(direction), ErrorKind::shape, "perturbation direction shape mismatch");
  require(v >= 0.0 && std::isfinite(v), ErrorKind::parameter, "perturbation norm must be non-negative");
  Matrix out = signal;
  if (v != 0.0) add_scaled(out, perturbation_sign(seed) * v, direction);
  return out;
}

SpatioTemporalSignal perturb_with_basis(const SpatioTemporalSignal& signal, std::size_t k, std::size_t l, double v,
                                        std::uint64_t seed, const GraphSpectrumBasis& basis) {
  return perturb_with_basis(signal, fourier_basis_perturbation(k, l, basis, signal.cols()), v, seed);
}

namespace {

void accumulate_magnitude(Matrix& acc, const SpatioTemporalSignal& signal, const GraphSpectrumBasis& basis) {
  const auto spectrum = jft(signal, basis);
  require(acc.rows() == spectrum.values.rows() && acc.cols() == spectrum.values.cols(), ErrorKind::data,
          "signals in a spectrum average must share one shape");
  const auto mag = spectrum.values.magnitude();
  acc += mag;
}

}  // namespace

Matrix mean_amplitude_spectrum(std::span<const SignalTriple> signals, const GraphSpectrumBasis& basis) {
  require(!signals.empty(), ErrorKind::data, "cannot average an empty signal set");
  Matrix acc(signals.front()[0].rows(), signals.front()[0].cols());
  for (const auto& triple : signals)
    for (const auto& ch : triple) accumulate_magnitude(acc, ch, basis);
  return (1.0 / (3.0 * static_cast<double>(signals.size()))) * acc;
}

Matrix difference_spectrum(std::span<const SignalTriple> clean, std::span<const SignalTriple> perturbed,
                           const GraphSpectrumBasis& basis, std::size_t frames) {
  require(clean.size() == perturbed.size(), ErrorKind::data, "clean and perturbed sets differ in length");
  require(!clean.empty(), ErrorKind::data, "cannot average an empty signal set");
  Matrix acc(basis.size(), frames);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const auto a = resample_temporal(clean[i][c], frames);
      const auto b = resample_temporal(perturbed[i][c], frames);
      accumulate_magnitude(acc, b - a, basis);
    }
  }
  return (1.0 / (3.0 * static_cast<double>(clean.size()))) * acc;
}

void PerturbationSpec::validate() const {
  if (kind == PerturbationKind::band_noise) {
    require(spatial.has_value() || temporal.has_value(), ErrorKind::parameter, "band noise needs at least one mask");
    require(k == 0 && l == 0 && v == 0.0, ErrorKind::parameter, "band noise spec carries basis fields");
    require(target_norm > 0.0, ErrorKind::parameter, "target norm must be positive");
  } else {
    require(!spatial && !temporal, ErrorKind::parameter, "basis spec carries masks");
    require(k >= 1, ErrorKind::parameter, "basis spec needs k >= 1");
    require(v > 0.0, ErrorKind::parameter, "basis norm v must be positive");
    require(target_norm == 0.0 || target_norm == v, ErrorKind::parameter, "basis target norm must equal v");
  }
}

SpatioTemporalSignal generate_perturbation(const PerturbationSpec& spec, const GraphSpectrumBasis& basis,
                                           std::size_t frames) {
  spec.validate();
  if (spec.kind == PerturbationKind::band_noise)
    return band_limited_noise(basis.size(), frames, basis, spec.spatial, spec.temporal, spec.target_norm, spec.seed);
  return (perturbation_sign(spec.seed) * spec.v) * fourier_basis_perturbation(spec.k, spec.l, basis, frames);
}

}  // namespace skelfreq
