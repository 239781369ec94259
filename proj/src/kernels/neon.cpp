#include <arm_neon.h>

#include "backends.hpp"

namespace skelfreq::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void caxpy(double re, double im, const double* x, double* y, std::size_t n) {
  const float64x2_t rv = vdupq_n_f64(re);
  const double signed_im[2] = {-im, im};
  const float64x2_t iv = vld1q_f64(signed_im);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t xv = vld1q_f64(x + 2 * i);
    const float64x2_t xs = vextq_f64(xv, xv, 1);
    float64x2_t yv = vld1q_f64(y + 2 * i);
    yv = vfmaq_f64(yv, rv, xv);
    yv = vfmaq_f64(yv, iv, xs);
    vst1q_f64(y + 2 * i, yv);
  }
}

double sum_squares(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) sum += x[i] * x[i];
  return sum;
}

void scale(double a, double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_n_f64(vld1q_f64(x + i), a));
  for (; i < n; ++i) x[i] *= a;
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{"neon", dot, axpy, caxpy, sum_squares, scale};
  return &table;
}

}  // namespace skelfreq::kernels::detail
