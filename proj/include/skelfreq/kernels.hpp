#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace skelfreq::kernels {

/// Function table for the data-parallel inner loops. Every backend must agree
/// with the scalar reference to rounding (see tests/unit/test_kernels.cpp).
struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y += (re + i*im) * x over `n` interleaved complex values.
  void (*caxpy)(double re, double im, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
};

const KernelTable& scalar();
/// nullptr when the backend was not compiled in or the CPU lacks it.
const KernelTable* avx2();
const KernelTable* neon();

/// Backends usable on this machine, scalar first.
std::vector<const KernelTable*> available();

/// Backend chosen at first use: the widest available one, unless the
/// SKELFREQ_SIMD environment variable names another (`scalar`, `avx2`, `neon`).
const KernelTable& active();

}  // namespace skelfreq::kernels
