#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "skelfreq/features.hpp"
#include "skelfreq/transforms.hpp"

namespace skelfreq {

/// Gaussian white noise (σ = 1) on N × T, passed through the spatial and/or
/// temporal masks and rescaled to Frobenius norm `target_norm`. Throws
/// parameter-error when the filtered noise is identically zero.
SpatioTemporalSignal band_limited_noise(std::size_t nodes, std::size_t frames, const GraphSpectrumBasis& basis,
                                        const std::optional<SpectralMask>& spatial,
                                        const std::optional<SpectralMask>& temporal, double target_norm,
                                        std::uint64_t seed);

/// Unit-norm real signal F_{k,l} of spatial rank k (1-based, descending λ)
/// and DFT bin l (0-based). Its JFT is supported on (k, l) and the conjugate
/// bin (k, (T - l) mod T) with equal real values, so F_{k,l} = F_{k,T-l}.
SpatioTemporalSignal fourier_basis_perturbation(std::size_t k, std::size_t l, const GraphSpectrumBasis& basis,
                                                std::size_t frames);

/// X + r·v·F_{k,l} with r drawn uniformly from {-1, +1} using `seed`.
SpatioTemporalSignal perturb_with_basis(const SpatioTemporalSignal& signal, std::size_t k, std::size_t l, double v,
                                        std::uint64_t seed, const GraphSpectrumBasis& basis);
/// Same, with a precomputed unit-norm direction.
SpatioTemporalSignal perturb_with_basis(const SpatioTemporalSignal& signal, const SpatioTemporalSignal& direction,
                                        double v, std::uint64_t seed);

/// The random sign perturb_with_basis draws for `seed`.
double perturbation_sign(std::uint64_t seed);

/// Elementwise mean of |JFT(X)| over every signal and all three channels.
Matrix mean_amplitude_spectrum(std::span<const SignalTriple> signals, const GraphSpectrumBasis& basis);

/// Mean of |JFT(I(perturbed) - I(clean))| over paired signals and channels,
/// where I resamples to `frames` (a no-op when lengths already agree).
Matrix difference_spectrum(std::span<const SignalTriple> clean, std::span<const SignalTriple> perturbed,
                           const GraphSpectrumBasis& basis, std::size_t frames = default_resampled_frames);

enum class PerturbationKind { band_noise, basis };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::band_noise;
  std::optional<SpectralMask> spatial;
  std::optional<SpectralMask> temporal;
  std::size_t k = 0;
  std::size_t l = 0;
  double v = 0.0;
  double target_norm = 0.0;
  std::uint64_t seed = 0;

  /// Exactly one kind's fields populated, positive norm.
  void validate() const;
};

/// The additive perturbation described by `spec` on an N × frames grid.
SpatioTemporalSignal generate_perturbation(const PerturbationSpec& spec, const GraphSpectrumBasis& basis,
                                           std::size_t frames);

}  // namespace skelfreq
