#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "heatnmf/matrix.hpp"

namespace heatnmf {

/// Thin SVD `a = u * diag(sigma) * v^T` with r = min(rows, cols) triplets.
///
/// `sigma` is non-increasing and non-negative; the columns of `u` (rows x r)
/// and `v` (cols x r) are orthonormal. Each pair (u_j, v_j) is signed so the
/// entry of u_j with the largest magnitude is positive (first such entry on
/// ties).
struct SvdResult {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
  int sweeps = 0;       // Jacobi sweeps performed
  bool converged = false;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// u * v^T for column vector u and row vector v.
Matrix outer(std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double squared_frobenius(const Matrix& a);
double frobenius(const Matrix& a);
double max_abs(const Matrix& a);

/// One-sided (Hestenes) Jacobi SVD, run on the taller orientation.
SvdResult svd(const Matrix& a);

/// Default relative rank threshold for `pinv`: 1e-12 * max(rows, cols).
double default_rank_tol(const Matrix& a);

/// Moore-Penrose pseudoinverse. Singular values below rank_tol * sigma_max
/// are treated as zero; an all-zero input yields the all-zero transpose.
Matrix pinv(const Matrix& a, std::optional<double> rank_tol = std::nullopt);

/// Element-wise split x = pos - neg with pos, neg >= 0 and disjoint supports.
std::pair<Matrix, Matrix> split_sections(const Matrix& x);

/// Element-wise max(0, x).
Matrix positive_part(const Matrix& x);
std::vector<double> positive_part(std::span<const double> x);
std::vector<double> negative_part(std::span<const double> x);

}  // namespace heatnmf
