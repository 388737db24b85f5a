#include "heatnmf/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "heatnmf/error.hpp"
#include "heatnmf/linalg.hpp"

namespace heatnmf {

namespace {

void require_conforming(const Matrix& t, const Factorization& f, const char* op) {
  if (f.w.rows() != t.rows() || f.theta.cols() != t.cols() || f.w.cols() != f.theta.rows()) {
    throw validation_error(std::string(op) + ": data " + shape_string(t) + " does not conform with W " +
                           shape_string(f.w) + " and Theta " + shape_string(f.theta));
  }
}

double uniform_positive(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> dist(std::numeric_limits<double>::min(), 1.0);
  return scale * dist(rng);
}

// Revives component l of (w, theta) from the largest residual row of t.
void revive(const Matrix& t, Matrix& w, Matrix& theta, std::size_t l, std::mt19937_64& rng,
            double eps) {
  const std::size_t n = t.rows();
  const std::size_t m = t.cols();
  const std::size_t k = w.cols();

  double best = -1.0;
  std::vector<double> residual(m);
  std::vector<double> best_residual(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = t(i, j);
      for (std::size_t c = 0; c < k; ++c) s -= w(i, c) * theta(c, j);
      residual[j] = s;
    }
    const double nrm = dot(residual, residual);
    if (nrm > best) {
      best = nrm;
      best_residual = residual;
    }
  }

  const double scale = 1e-6 * std::max(1.0, max_abs(t));
  std::vector<double> row = positive_part(best_residual);
  if (dot(row, row) <= eps) {
    // Residual has no positive mass left; any positive direction will do.
    for (double& x : row) x = uniform_positive(rng, scale);
  }
  for (std::size_t j = 0; j < m; ++j) theta(l, j) = row[j];
  for (std::size_t i = 0; i < n; ++i) w(i, l) = uniform_positive(rng, scale);
}

// Updates every column of w in ascending order with theta held fixed.
void update_columns(const Matrix& t, Matrix& w, Matrix& theta, double eps, std::mt19937_64& rng,
                    FactorSide dead_side, std::size_t iteration, std::vector<ReviveEvent>* revivals) {
  const std::size_t n = t.rows();
  const std::size_t k = w.cols();

  Matrix t_theta = matmul(t, theta.transposed());  // n x k
  Matrix gram = matmul(theta, theta.transposed());  // k x k

  for (std::size_t l = 0; l < k; ++l) {
    if (gram(l, l) <= eps) {
      revive(t, w, theta, l, rng, eps);
      if (revivals) revivals->push_back({iteration, l, dead_side});
      t_theta = matmul(t, theta.transposed());
      gram = matmul(theta, theta.transposed());
      if (gram(l, l) <= eps) throw numerical_error("hals: component could not be revived");
    }
    const double denom = gram(l, l);
    for (std::size_t i = 0; i < n; ++i) {
      double num = t_theta(i, l);
      auto wi = w.row(i);
      for (std::size_t c = 0; c < k; ++c) {
        if (c != l) num -= wi[c] * gram(c, l);
      }
      wi[l] = std::max(0.0, num / denom);
    }
  }
}

void update_weights(const Matrix& t, Factorization& f, double eps, std::mt19937_64& rng,
                    std::size_t iteration, std::vector<ReviveEvent>* revivals) {
  update_columns(t, f.w, f.theta, eps, rng, FactorSide::Profiles, iteration, revivals);
}

// Same rule on the transposed problem ||T^T - Theta^T W^T||.
void update_profiles(const Matrix& t_transposed, Factorization& f, double eps,
                     std::mt19937_64& rng, std::size_t iteration,
                     std::vector<ReviveEvent>* revivals) {
  Matrix theta_t = f.theta.transposed();
  Matrix w_t = f.w.transposed();
  update_columns(t_transposed, theta_t, w_t, eps, rng, FactorSide::Weights, iteration, revivals);
  f.theta = theta_t.transposed();
  f.w = w_t.transposed();
}

Factorization sweep_impl(const Matrix& t, const Matrix& t_transposed, Factorization f,
                         const SolverConfig& config, std::mt19937_64& rng,
                         std::vector<ReviveEvent>* revivals, std::size_t iteration) {
  if (config.order == SweepOrder::WeightsFirst) {
    update_weights(t, f, config.dead_component_eps, rng, iteration, revivals);
    update_profiles(t_transposed, f, config.dead_component_eps, rng, iteration, revivals);
  } else {
    update_profiles(t_transposed, f, config.dead_component_eps, rng, iteration, revivals);
    update_weights(t, f, config.dead_component_eps, rng, iteration, revivals);
  }
  return f;
}

void validate_config(const SolverConfig& c) {
  if (c.max_iters < 1) throw validation_error("solver: max_iters must be >= 1");
  if (!(c.rel_tol >= 0.0)) throw validation_error("solver: rel_tol must be >= 0");
  if (!(c.dead_component_eps > 0.0)) throw validation_error("solver: dead_component_eps must be > 0");
}

}  // namespace

void require_nonnegative(const Matrix& m, const char* what) {
  std::ostringstream coords;
  std::size_t count = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) < 0.0) {
        if (count < 10) coords << (count ? ", " : "") << "(" << i << ", " << j << ")";
        ++count;
      }
    }
  }
  if (count > 0) {
    std::ostringstream msg;
    msg << what << ": " << count << " negative entr" << (count == 1 ? "y" : "ies") << " at "
        << coords.str() << (count > 10 ? ", ..." : "");
    throw validation_error(msg.str());
  }
}

double cost(const Matrix& t, const Factorization& f) {
  require_conforming(t, f, "cost");
  const std::size_t k = f.k();
  double total = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto wi = f.w.row(i);
    for (std::size_t j = 0; j < t.cols(); ++j) {
      double s = t(i, j);
      for (std::size_t c = 0; c < k; ++c) s -= wi[c] * f.theta(c, j);
      total += s * s;
    }
  }
  return total;
}

Matrix reconstruct(const Factorization& f) { return matmul(f.w, f.theta); }

std::vector<double> hals_update_w_column(const Matrix& t, const Factorization& f, std::size_t l,
                                         double eps) {
  require_conforming(t, f, "hals_update_w_column");
  if (l >= f.k()) throw validation_error("hals_update_w_column: component index out of range");
  auto theta_l = f.theta.row(l);
  const double denom = dot(theta_l, theta_l);
  if (denom <= eps) {
    throw numerical_error("hals_update_w_column: component " + std::to_string(l) +
                          " has a degenerate profile (squared norm below threshold)");
  }
  std::vector<double> cross(f.k());
  for (std::size_t c = 0; c < f.k(); ++c) cross[c] = dot(f.theta.row(c), theta_l);

  std::vector<double> out(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    double num = dot(t.row(i), theta_l);
    for (std::size_t c = 0; c < f.k(); ++c) {
      if (c != l) num -= f.w(i, c) * cross[c];
    }
    out[i] = std::max(0.0, num / denom);
  }
  return out;
}

Factorization hals_sweep(const Matrix& t, Factorization f, const SolverConfig& config,
                         std::mt19937_64* rng, std::vector<ReviveEvent>* revivals,
                         std::size_t iteration) {
  require_conforming(t, f, "hals_sweep");
  std::mt19937_64 local(config.revive_seed);
  return sweep_impl(t, t.transposed(), std::move(f), config, rng ? *rng : local, revivals,
                    iteration);
}

Factorization revive_dead_component(const Matrix& t, Factorization f, std::size_t l,
                                    std::mt19937_64& rng) {
  require_conforming(t, f, "revive_dead_component");
  if (l >= f.k()) throw validation_error("revive_dead_component: component index out of range");
  revive(t, f.w, f.theta, l, rng, 1e-12);
  return f;
}

SolveResult solve(const Matrix& t, const Factorization& init, const SolverConfig& config) {
  validate_config(config);
  require_finite(t, "data");
  require_conforming(t, init, "solve");
  const std::size_t k = init.k();
  if (k < 1 || k > std::min(t.rows(), t.cols())) {
    throw validation_error("solve: rank " + std::to_string(k) + " outside [1, min(N, M)] for data " +
                           shape_string(t));
  }
  require_nonnegative(t, "data");
  require_finite(init.w, "initial W");
  require_finite(init.theta, "initial Theta");
  require_nonnegative(init.w, "initial W");
  require_nonnegative(init.theta, "initial Theta");

  SolveResult result;
  result.factors = init;
  const Matrix t_transposed = t.transposed();
  std::mt19937_64 rng(config.revive_seed);

  double previous = cost(t, init);
  result.trace.initial_cost = previous;
  // Floor for the relative-change denominator: costs below 1e-20 |T|^2 are
  // roundoff and must not read as large relative changes.
  const double floor = std::max(1e-20 * squared_frobenius(t), std::numeric_limits<double>::min());
  const double scale = std::max(previous, floor);

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    result.factors = sweep_impl(t, t_transposed, std::move(result.factors), config, rng,
                                &result.trace.revivals, it);
    const double current = cost(t, result.factors);
    if (!std::isfinite(current)) {
      throw numerical_error("solve: cost became non-finite at iteration " + std::to_string(it));
    }
    result.trace.costs.push_back(current);
    if (std::abs(previous - current) / scale < config.rel_tol) {
      result.converged = true;
      break;
    }
    previous = current;
  }

  if (config.normalize_output) {
    NormalizeResult n = normalize(result.factors);
    result.factors = std::move(n.factors);
    result.l1_norms = std::move(n.l1_norms);
    result.zero_rows = std::move(n.zero_rows);
  }
  return result;
}

NormalizeResult normalize(const Factorization& f) {
  NormalizeResult out;
  out.factors = f;
  out.l1_norms.resize(f.k());
  for (std::size_t c = 0; c < f.k(); ++c) {
    double s = 0.0;
    for (double x : f.theta.row(c)) s += std::abs(x);
    out.l1_norms[c] = s;
    if (s > 0.0) {
      for (double& x : out.factors.theta.row(c)) x /= s;
      for (std::size_t i = 0; i < f.w.rows(); ++i) out.factors.w(i, c) *= s;
    } else {
      out.zero_rows.push_back(c);
    }
  }
  return out;
}

}  // namespace heatnmf
