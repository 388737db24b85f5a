#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "heatnmf/matrix.hpp"

namespace heatnmf {

/// T ~= W * Theta with W (N x K) holding per-recording weights and Theta
/// (K x M) holding the component profiles. All entries are >= 0.
struct Factorization {
  Matrix w;
  Matrix theta;

  std::size_t k() const noexcept { return w.cols(); }
};

/// Which factor the alternating sweep updates first.
enum class SweepOrder {
  WeightsFirst,   // W columns 1..K, then Theta rows 1..K
  ProfilesFirst,  // Theta rows 1..K, then W columns 1..K
};

struct SolverConfig {
  std::size_t max_iters = 500;
  double rel_tol = 1e-8;
  double dead_component_eps = 1e-12;
  bool normalize_output = false;
  SweepOrder order = SweepOrder::WeightsFirst;
  std::uint64_t revive_seed = 0;
};

enum class FactorSide { Weights, Profiles };

/// A collapsed component that was reinitialised from the residual.
struct ReviveEvent {
  std::size_t iteration;  // 1-based iteration during which it happened
  std::size_t component;  // 0-based
  FactorSide dead_side;
};

struct ConvergenceTrace {
  double initial_cost = 0.0;
  std::vector<double> costs;  // one entry per completed iteration
  std::vector<ReviveEvent> revivals;
};

struct NormalizeResult {
  Factorization factors;
  std::vector<double> l1_norms;         // Theta row L1 norms before scaling
  std::vector<std::size_t> zero_rows;   // rows with zero L1 norm, untouched
};

struct SolveResult {
  Factorization factors;
  ConvergenceTrace trace;
  bool converged = false;  // relative-change criterion met before max_iters
  std::vector<double> l1_norms;        // filled when normalisation ran
  std::vector<std::size_t> zero_rows;  // filled when normalisation ran
};

/// Squared Frobenius reconstruction error sum_ij (T - W Theta)_ij^2.
double cost(const Matrix& t, const Factorization& f);

/// W Theta.
Matrix reconstruct(const Factorization& f);

/// Closed-form minimiser of the cost over column l of W, all else fixed:
/// max(0, (T Theta_l^T - sum_{k != l} W_k (Theta_k Theta_l^T)) / |Theta_l|^2).
/// Throws a numerical error if |Theta_l|^2 <= eps.
std::vector<double> hals_update_w_column(const Matrix& t, const Factorization& f,
                                         std::size_t l, double eps = 1e-12);

/// One full HALS iteration: every W column in ascending order, then every
/// Theta row via the same rule on the transposed problem (or the reverse for
/// `SweepOrder::ProfilesFirst`). Dead components are revived on the fly and
/// recorded in `revivals` when provided.
Factorization hals_sweep(const Matrix& t, Factorization f,
                         const SolverConfig& config = {},
                         std::mt19937_64* rng = nullptr,
                         std::vector<ReviveEvent>* revivals = nullptr,
                         std::size_t iteration = 0);

/// Reinitialise component l: Theta row <- max(0, largest-norm residual row),
/// W column <- small positive uniform noise.
Factorization revive_dead_component(const Matrix& t, Factorization f,
                                    std::size_t l, std::mt19937_64& rng);

/// Runs HALS sweeps until |D_i - D_{i+1}| / max(D_0, 1e-20 |T|^2) < rel_tol
/// or max_iters is reached. D_0 is the cost of the initial factors.
SolveResult solve(const Matrix& t, const Factorization& init,
                  const SolverConfig& config = {});

/// Divides each Theta row by its L1 norm and scales the matching W column by
/// the same value. Rows with zero norm are left as is and reported.
NormalizeResult normalize(const Factorization& f);

/// Throws a validation error listing offending coordinates if any entry < 0.
void require_nonnegative(const Matrix& m, const char* what);

}  // namespace heatnmf
