#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library's transform or linear-algebra code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "skelfreq/matrix.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Dense = std::vector<std::vector<double>>;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
inline std::vector<double> jacobi_eigenvalues(Dense a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

/// Laplacian D - A built directly from an edge list.
inline Dense laplacian(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Dense l(n, std::vector<double>(n, 0.0));
  for (auto [u, v] : edges) {
    l[u][v] -= 1.0;
    l[v][u] -= 1.0;
    l[u][u] += 1.0;
    l[v][v] += 1.0;
  }
  return l;
}

/// O(T²) DFT of one real row: X[l] = Σ_t x[t] exp(-2πi t l / T).
inline std::vector<cplx> naive_dft(const std::vector<double>& x) {
  const std::size_t T = x.size();
  std::vector<cplx> out(T);
  for (std::size_t l = 0; l < T; ++l) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(t * l) / static_cast<double>(T);
      acc += x[t] * cplx(std::cos(ang), std::sin(ang));
    }
    out[l] = acc;
  }
  return out;
}

inline skelfreq::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  skelfreq::Matrix m(rows, cols);
  for (double& v : m.values()) v = u(gen);
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = u(gen);
  return v;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace oracle
