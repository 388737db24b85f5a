#pragma once

#include <cmath>
#include <random>

#include "heatnmf/linalg.hpp"
#include "heatnmf/matrix.hpp"

namespace heatnmf::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = d(rng);
  return m;
}

// Triple loop in textbook i-j-k order; independent of matmul's i-k-j loop.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline double rel_frobenius_diff(const Matrix& a, const Matrix& b) {
  const double base = frobenius(b);
  return frobenius(a - b) / (base > 0.0 ? base : 1.0);
}

inline Matrix diag_product(const SvdResult& s) {
  Matrix us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= s.sigma[j];
  return naive_matmul(us, s.v.transposed());
}

inline double orthonormality_defect(const Matrix& q) {
  return max_abs_diff(naive_matmul(q.transposed(), q), Matrix::identity(q.cols()));
}

}  // namespace heatnmf::testing
