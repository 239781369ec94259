#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "skelfreq/error.hpp"

namespace skelfreq {

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, ErrorKind::shape, "matrix data size does not match shape");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  Matrix transposed() const;

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense row-major complex matrix stored as interleaved (re, im) doubles.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(2 * rows * cols, 0.0) {}

  /// Real matrix promoted to complex with zero imaginary part.
  static ComplexMatrix from_real(const Matrix& m);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::complex<double> operator()(std::size_t r, std::size_t c) const noexcept {
    const std::size_t i = 2 * (r * cols_ + c);
    return {data_[i], data_[i + 1]};
  }
  void set(std::size_t r, std::size_t c, std::complex<double> v) noexcept {
    const std::size_t i = 2 * (r * cols_ + c);
    data_[i] = v.real();
    data_[i + 1] = v.imag();
  }

  /// Interleaved view of one row: 2 * cols doubles.
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + 2 * r * cols_, 2 * cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + 2 * r * cols_, 2 * cols_};
  }

  std::span<double> interleaved() noexcept { return data_; }
  std::span<const double> interleaved() const noexcept { return data_; }

  Matrix real() const;
  Matrix imag() const;
  Matrix magnitude() const;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense products, backed by the dispatched SIMD kernels.
Matrix multiply(const Matrix& a, const Matrix& b);
/// aᵀ·b without materialising the transpose.
Matrix multiply_transposed_left(const Matrix& a, const Matrix& b);
ComplexMatrix multiply(const Matrix& a, const ComplexMatrix& b);
ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b);

double frobenius_norm(const Matrix& m);
double frobenius_norm(const ComplexMatrix& m);
double dot(const Matrix& a, const Matrix& b);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& m);
Matrix& operator+=(Matrix& a, const Matrix& b);
/// a += s·b
void add_scaled(Matrix& a, double s, const Matrix& b);

double max_abs_difference(const Matrix& a, const Matrix& b);

}  // namespace skelfreq
