#include "skelfreq/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "skelfreq/kernels.hpp"

namespace skelfreq {

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

ComplexMatrix ComplexMatrix::from_real(const Matrix& m) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out.data_[2 * (r * m.cols() + c)] = m(r, c);
  return out;
}

Matrix ComplexMatrix::real() const {
  Matrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_ * cols_; ++i) out.data()[i] = data_[2 * i];
  return out;
}

Matrix ComplexMatrix::imag() const {
  Matrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_ * cols_; ++i) out.data()[i] = data_[2 * i + 1];
  return out;
}

Matrix ComplexMatrix::magnitude() const {
  Matrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_ * cols_; ++i) out.data()[i] = std::hypot(data_[2 * i], data_[2 * i + 1]);
  return out;
}

// Products run in i-k-j order so the innermost loop is a contiguous axpy.

Matrix multiply(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorKind::shape, "matrix product: inner dimensions differ");
  const auto& k = kernels::active();
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = a(i, p);
      if (s != 0.0) k.axpy(s, b.row(p).data(), dst, b.cols());
    }
  }
  return out;
}

Matrix multiply_transposed_left(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), ErrorKind::shape, "transposed product: row counts differ");
  const auto& k = kernels::active();
  Matrix out(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    const double* src = b.row(p).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = a(p, i);
      if (s != 0.0) k.axpy(s, src, out.row(i).data(), b.cols());
    }
  }
  return out;
}

ComplexMatrix multiply(const Matrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), ErrorKind::shape, "matrix product: inner dimensions differ");
  const auto& k = kernels::active();
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = a(i, p);
      // a real scalar times interleaved data is a plain axpy over 2*cols doubles
      if (s != 0.0) k.axpy(s, b.row(p).data(), dst, 2 * b.cols());
    }
  }
  return out;
}

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), ErrorKind::shape, "matrix product: inner dimensions differ");
  const auto& k = kernels::active();
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const auto s = a(i, p);
      if (s != 0.0) k.caxpy(s.real(), s.imag(), b.row(p).data(), dst, b.cols());
    }
  }
  return out;
}

double frobenius_norm(const Matrix& m) {
  return std::sqrt(kernels::active().sum_squares(m.data(), m.size()));
}

double frobenius_norm(const ComplexMatrix& m) {
  const auto v = m.interleaved();
  return std::sqrt(kernels::active().sum_squares(v.data(), v.size()));
}

double dot(const Matrix& a, const Matrix& b) {
  require(a.same_shape(b), ErrorKind::shape, "dot: shapes differ");
  return kernels::active().dot(a.data(), b.data(), a.size());
}

void add_scaled(Matrix& a, double s, const Matrix& b) {
  require(a.same_shape(b), ErrorKind::shape, "add_scaled: shapes differ");
  kernels::active().axpy(s, b.data(), a.data(), a.size());
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
  add_scaled(a, 1.0, b);
  return a;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  add_scaled(out, 1.0, b);
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  add_scaled(out, -1.0, b);
  return out;
}

Matrix operator*(double s, const Matrix& m) {
  Matrix out = m;
  kernels::active().scale(s, out.data(), out.size());
  return out;
}

double max_abs_difference(const Matrix& a, const Matrix& b) {
  require(a.same_shape(b), ErrorKind::shape, "max_abs_difference: shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace skelfreq
