#include "heatnmf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "heatnmf/error.hpp"

namespace heatnmf {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kJacobiTol = 1e-12;

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw validation_error(std::string(op) + ": shape mismatch between left operand " +
                           shape_string(a) + " and right operand " + shape_string(b));
  }
}

// Flip (u_j, v_j) so the largest-magnitude entry of u_j is positive.
void fix_signs(Matrix& u, Matrix& v) {
  for (std::size_t j = 0; j < u.cols(); ++j) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (u(best, j) < 0.0) {
      for (std::size_t i = 0; i < u.rows(); ++i) u(i, j) = -u(i, j);
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
    }
  }
}

// Replace u.row(j) (a zero vector) by a unit vector orthogonal to the other
// rows in `filled`.
void complete_basis(Matrix& ut, std::size_t j, const std::vector<bool>& filled) {
  const std::size_t m = ut.cols();
  std::vector<double> best;
  double best_norm = -1.0;
  for (std::size_t e = 0; e < m; ++e) {
    std::vector<double> cand(m, 0.0);
    cand[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t q = 0; q < ut.rows(); ++q) {
        if (q == j || !filled[q]) continue;
        const double p = dot(cand, ut.row(q));
        for (std::size_t i = 0; i < m; ++i) cand[i] -= p * ut(q, i);
      }
    }
    const double nrm = norm2(cand);
    if (nrm > best_norm) {
      best_norm = nrm;
      best = std::move(cand);
    }
    if (best_norm > 0.5) break;
  }
  for (std::size_t i = 0; i < m; ++i) ut(j, i) = best[i] / best_norm;
}

// One-sided Jacobi on a (rows >= cols). Columns of A are orthogonalised in
// place; we keep them as rows of `g` so that each is contiguous.
SvdResult svd_tall(const Matrix& a) {
  const std::size_t n = a.cols();
  Matrix g = a.transposed();      // n x m, row p = column p of A
  Matrix vt = Matrix::identity(n);  // row p = column p of V

  SvdResult out;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto gp = g.row(p);
        auto gq = g.row(q);
        const double alpha = dot(gp, gp);
        const double beta = dot(gq, gq);
        const double gamma = dot(gp, gq);
        if (gamma == 0.0) continue;
        if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha) * std::sqrt(beta)) continue;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < gp.size(); ++i) {
          const double x = gp[i];
          const double y = gq[i];
          gp[i] = c * x - s * y;
          gq[i] = s * x + c * y;
        }
        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
        rotated = true;
      }
    }
    out.sweeps = sweep + 1;
    if (!rotated) {
      out.converged = true;
      break;
    }
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = norm2(g.row(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  const std::size_t m = a.rows();
  Matrix ut(n, m);
  Matrix vs(n, n);
  out.sigma.resize(n);
  std::vector<bool> filled(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = norms[src];
    if (norms[src] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) ut(j, i) = g(src, i) / norms[src];
      filled[j] = true;
    }
    for (std::size_t i = 0; i < n; ++i) vs(j, i) = vt(src, i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!filled[j]) {
      complete_basis(ut, j, filled);
      filled[j] = true;
    }
  }
  out.u = ut.transposed();
  out.v = vs.transposed();
  fix_signs(out.u, out.v);
  return out;
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw validation_error("matmul: left operand " + shape_string(a) +
                           " does not conform with right operand " + shape_string(b));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& x : c.data()) x *= s;
  return c;
}

Matrix outer(std::span<const double> u, std::span<const double> v) {
  Matrix c(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) c(i, j) = u[i] * v[j];
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double squared_frobenius(const Matrix& a) { return dot(a.data(), a.data()); }

double frobenius(const Matrix& a) { return std::sqrt(squared_frobenius(a)); }

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

SvdResult svd(const Matrix& a) {
  if (a.empty()) throw validation_error("svd: empty matrix");
  require_finite(a, "svd input");
  if (a.rows() >= a.cols()) return svd_tall(a);

  SvdResult r = svd_tall(a.transposed());
  std::swap(r.u, r.v);
  fix_signs(r.u, r.v);
  return r;
}

double default_rank_tol(const Matrix& a) {
  return 1e-12 * static_cast<double>(std::max(a.rows(), a.cols()));
}

Matrix pinv(const Matrix& a, std::optional<double> rank_tol) {
  if (a.empty()) throw validation_error("pinv: empty matrix");
  const double tol = rank_tol.value_or(default_rank_tol(a));
  if (!(tol > 0.0)) throw validation_error("pinv: rank_tol must be positive");

  const SvdResult s = svd(a);
  Matrix out(a.cols(), a.rows());
  if (s.sigma.empty() || s.sigma.front() == 0.0) return out;
  const double cutoff = tol * s.sigma.front();
  for (std::size_t j = 0; j < s.sigma.size(); ++j) {
    if (s.sigma[j] <= cutoff) continue;
    const double inv = 1.0 / s.sigma[j];
    for (std::size_t r = 0; r < out.rows(); ++r) {
      const double vr = s.v(r, j) * inv;
      if (vr == 0.0) continue;
      for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += vr * s.u(c, j);
    }
  }
  return out;
}

std::pair<Matrix, Matrix> split_sections(const Matrix& x) {
  Matrix pos(x.rows(), x.cols());
  Matrix neg(x.rows(), x.cols());
  auto xd = x.data();
  auto pd = pos.data();
  auto nd = neg.data();
  for (std::size_t i = 0; i < xd.size(); ++i) {
    if (xd[i] > 0.0) {
      pd[i] = xd[i];
    } else if (xd[i] < 0.0) {
      nd[i] = -xd[i];
    }
  }
  return {std::move(pos), std::move(neg)};
}

Matrix positive_part(const Matrix& x) { return split_sections(x).first; }

std::vector<double> positive_part(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

std::vector<double> negative_part(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] < 0.0 ? -x[i] : 0.0;
  return out;
}

}  // namespace heatnmf
