#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skelfreq/matrix.hpp"
#include "skelfreq/skeleton_graph.hpp"

namespace skelfreq {

/// One coordinate channel of a skeleton sequence: N nodes × T frames.
using SpatioTemporalSignal = Matrix;

/// The x, y and z channels of one feature.
using SignalTriple = std::array<SpatioTemporalSignal, 3>;

/// JFT(X) = Uᵀ X W with the unnormalised DFT matrix W.
struct JointSpectrum {
  ComplexMatrix values;
  std::string basis_id;
};

/// T×T DFT matrix W with W(j, k) = exp(-2πi jk / T). Cached per T.
std::shared_ptr<const ComplexMatrix> dft_matrix(std::size_t frames);

Matrix gft(const SpatioTemporalSignal& signal, const GraphSpectrumBasis& basis);
Matrix igft(const Matrix& graph_spectrum, const GraphSpectrumBasis& basis);

/// Row-wise unnormalised DFT: X·W.
ComplexMatrix dft(const Matrix& signal);
ComplexMatrix dft(const ComplexMatrix& signal);
/// Inverse: X·W⁻¹ with W⁻¹ = conj(W) / T.
ComplexMatrix idft(const ComplexMatrix& spectrum);

JointSpectrum jft(const SpatioTemporalSignal& signal, const GraphSpectrumBasis& basis);

/// U · S · W⁻¹ as a complex matrix, with no realness check.
ComplexMatrix ijft_complex(const ComplexMatrix& spectrum, const GraphSpectrumBasis& basis);

/// Real inverse JFT. The imaginary residue, relative to max(1, max |Re|), is
/// dropped silently below 1e-9, with a warning up to 1e-6, and raises
/// numeric-error above that.
SpatioTemporalSignal ijft(const JointSpectrum& spectrum, const GraphSpectrumBasis& basis);

enum class MaskAxis { spatial, temporal };
enum class MaskKind { low, high };

/// Binary diagonal mask over GFT rows (spatial) or DFT bins (temporal).
///
/// Spatial masks select eigenvalue ranks: `low` keeps the last `bandwidth`
/// rows (smallest λ), `high` the first ones. Temporal masks select frequency
/// levels |f| = min(l, T - l); a level other than DC and Nyquist covers both
/// conjugate bins, so `bandwidth` counts levels rather than bins and filtered
/// real signals stay real.
struct SpectralMask {
  MaskAxis axis = MaskAxis::spatial;
  MaskKind kind = MaskKind::low;
  std::size_t bandwidth = 0;
  std::vector<std::uint8_t> diagonal;

  std::size_t size() const noexcept { return diagonal.size(); }
  std::size_t popcount() const noexcept;
  /// e.g. "spatial-low-2"
  std::string describe() const;
};

/// Number of distinct temporal frequency levels for T frames: ⌊T/2⌋ + 1.
std::size_t temporal_levels(std::size_t frames);

/// Throws parameter-error unless 1 ≤ bandwidth ≤ size (spatial) or
/// 1 ≤ bandwidth ≤ temporal_levels(size) (temporal).
SpectralMask make_mask(MaskAxis axis, MaskKind kind, std::size_t bandwidth, std::size_t size);

/// Zeroes the masked-out GFT rows and/or DFT bins and transforms back.
SpatioTemporalSignal apply_filter(const SpatioTemporalSignal& signal, const GraphSpectrumBasis& basis,
                                  const std::optional<SpectralMask>& spatial,
                                  const std::optional<SpectralMask>& temporal);

/// Fraction of JFT energy that lies outside the (spatial × temporal) passband.
double out_of_band_energy_fraction(const JointSpectrum& spectrum, const std::optional<SpectralMask>& spatial,
                                   const std::optional<SpectralMask>& temporal);

// Spectrum serialisation. The binary dump is a 16-byte header (magic "JFTS",
// then N, T and flags as little-endian uint32) followed by row-major doubles,
// interleaved (re, im) when flags bit 0 is set.
inline constexpr std::uint32_t spectrum_flag_complex = 1u;

void write_spectrum_binary(std::ostream& out, const ComplexMatrix& spectrum);
void write_spectrum_binary(std::ostream& out, const Matrix& magnitudes);
/// Returns the stored payload; real dumps come back with zero imaginary part.
ComplexMatrix read_spectrum_binary(std::istream& in, std::uint32_t* flags = nullptr);

/// Magnitude CSV, one spatial rank per row, 17 significant digits.
void write_magnitude_csv(std::ostream& out, const Matrix& magnitudes);

}  // namespace skelfreq
