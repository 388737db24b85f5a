#include <doctest.h>

#include <random>

#include "heatnmf/error.hpp"
#include "heatnmf/linalg.hpp"
#include "heatnmf/nmf.hpp"
#include "test_support.hpp"

using namespace heatnmf;
using namespace heatnmf::testing;

namespace {

Factorization random_factors(std::size_t n, std::size_t m, std::size_t k, std::mt19937_64& rng) {
  return {random_matrix(n, k, rng, 0.0, 1.0), random_matrix(k, m, rng, 0.0, 1.0)};
}

// Cost of row i with W(i, l) replaced by `w`, computed from the explicit
// residual vector.
double row_cost(const Matrix& t, const Factorization& f, std::size_t i, std::size_t l, double w) {
  double s = 0.0;
  for (std::size_t j = 0; j < t.cols(); ++j) {
    double r = t(i, j);
    for (std::size_t c = 0; c < f.k(); ++c) r -= (c == l ? w : f.w(i, c)) * f.theta(c, j);
    s += r * r;
  }
  return s;
}

}  // namespace

TEST_SUITE("cost") {
  TEST_CASE("exact factorization has zero cost") {
    const Factorization f{Matrix{{1, 2}, {0, 1}}, Matrix{{1, 0, 2}, {3, 1, 0}}};
    CHECK(cost(reconstruct(f), f) == 0.0);
  }

  TEST_CASE("direct arithmetic") {
    CHECK(cost(Matrix{{1, 0}, {0, 1}}, {Matrix{{1}, {1}}, Matrix{{0.5, 0.5}}}) == doctest::Approx(1.0));
  }

  TEST_CASE("doubling the residual quadruples the cost") {
    std::mt19937_64 rng(2);
    const Matrix t = random_matrix(5, 4, rng, 0.0, 1.0);
    const Factorization f = random_factors(5, 4, 2, rng);
    const Factorization f2{2.0 * f.w, f.theta};
    CHECK(cost(2.0 * t, f2) == doctest::Approx(4.0 * cost(t, f)).epsilon(1e-14));
  }

  TEST_CASE("shape mismatch") {
    CHECK_THROWS_AS(cost(Matrix(3, 3), {Matrix(2, 1), Matrix(1, 3)}), Error);
  }

  TEST_CASE("positive diagonal rescaling leaves cost unchanged") {
    std::mt19937_64 rng(4);
    const Matrix t = random_matrix(6, 5, rng, 0.0, 1.0);
    const Factorization f = random_factors(6, 5, 3, rng);
    Factorization g = f;
    const double d[] = {4.0, 0.125, 2.0};  // powers of two keep the rescaling exact
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < 6; ++i) g.w(i, c) *= d[c];
      for (double& x : g.theta.row(c)) x /= d[c];
    }
    CHECK(cost(t, g) == cost(t, f));
  }
}

TEST_SUITE("hals_update_w_column") {
  TEST_CASE("single component least squares") {
    const Factorization f{Matrix{{0}, {0}}, Matrix{{1}}};
    const auto w = hals_update_w_column(Matrix{{2}, {4}}, f, 0);
    CHECK(w == std::vector<double>{2, 4});
  }

  TEST_CASE("non-positive numerator clamps to zero") {
    const Factorization f{Matrix{{1}, {1}, {1}}, Matrix{{1, 2}}};
    const auto w = hals_update_w_column(Matrix(3, 2), f, 0);
    CHECK(w == std::vector<double>{0, 0, 0});
  }

  TEST_CASE("degenerate profile is an invariant violation") {
    const Factorization f{Matrix{{1}}, Matrix{{0, 0}}};
    try {
      hals_update_w_column(Matrix{{1, 1}}, f, 0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Numerical);
    }
  }

  TEST_CASE("matches per-entry scalar NNLS on a random problem") {
    std::mt19937_64 rng(6);
    const Matrix t = random_matrix(6, 5, rng, 0.0, 1.0);
    const Factorization f = random_factors(6, 5, 3, rng);
    for (std::size_t l = 0; l < 3; ++l) {
      const auto w = hals_update_w_column(t, f, l);
      const auto theta_l = f.theta.row(l);
      for (std::size_t i = 0; i < 6; ++i) {
        // Scalar quadratic a w^2 - 2 b w + c over w >= 0: minimiser max(0, b / a).
        std::vector<double> r(5);
        for (std::size_t j = 0; j < 5; ++j) {
          r[j] = t(i, j);
          for (std::size_t c = 0; c < 3; ++c) {
            if (c != l) r[j] -= f.w(i, c) * f.theta(c, j);
          }
        }
        const double expected = std::max(0.0, dot(r, theta_l) / dot(theta_l, theta_l));
        CHECK(std::abs(w[i] - expected) <= 1e-12);
        // No feasible neighbour does better.
        const double here = row_cost(t, f, i, l, w[i]);
        CHECK(row_cost(t, f, i, l, w[i] + 1e-4) >= here);
        if (w[i] >= 1e-4) CHECK(row_cost(t, f, i, l, w[i] - 1e-4) >= here);
      }
    }
  }
}

TEST_SUITE("hals_sweep") {
  TEST_CASE("exact factorization is a fixed point") {
    const Factorization f{Matrix{{1}, {2}, {3}}, Matrix{{2, 1, 0.5}}};
    const Matrix t = reconstruct(f);
    const Factorization g = hals_sweep(t, f);
    CHECK(max_abs_diff(g.w, f.w) <= 1e-12);
    CHECK(max_abs_diff(g.theta, f.theta) <= 1e-12);
  }

  TEST_CASE("rank-one problem converges to the outer product") {
    const Matrix t{{1, 2}, {2, 4}};
    Factorization f{Matrix{{0.3}, {0.9}}, Matrix{{0.7, 0.2}}};
    for (int i = 0; i < 50; ++i) f = hals_sweep(t, f);
    CHECK(cost(t, f) <= 1e-20);
    CHECK(f.w(1, 0) / f.w(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(f.theta(0, 1) / f.theta(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  }

  TEST_CASE("every sweep is non-increasing on random problems") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix t = random_matrix(20, 32, rng, 0.0, 1.0);
      Factorization f = random_factors(20, 32, 4, rng);
      double prev = cost(t, f);
      for (int it = 0; it < 10; ++it) {
        f = hals_sweep(t, f);
        const double now = cost(t, f);
        CHECK(now <= prev + 1e-12 * prev);
        prev = now;
        for (double x : f.w.data()) REQUIRE(x >= 0.0);
        for (double x : f.theta.data()) REQUIRE(x >= 0.0);
      }
    }
  }
}

TEST_SUITE("revive_dead_component") {
  TEST_CASE("dead profile takes the clamped largest residual row") {
    const Matrix t{{1, 0, 2}, {5, -0.0, 6}, {0, 0, 1}};
    Factorization f{Matrix{{1, 0}, {1, 0}, {1, 0}}, Matrix{{1, 1, 1}, {0, 0, 0}}};
    std::mt19937_64 rng(1);
    const Factorization g = revive_dead_component(t, f, 1, rng);
    // Residual rows: (0,-1,1), (4,-1,5), (-1,-1,0); largest is row 1.
    CHECK(g.theta(1, 0) == 4.0);
    CHECK(g.theta(1, 1) == 0.0);
    CHECK(g.theta(1, 2) == 5.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(g.w(i, 1) > 0.0);
    CHECK(g.theta.row(0)[0] == 1.0);
  }

  TEST_CASE("solver survives an over-specified rank with a collapsed init") {
    std::mt19937_64 rng(12);
    const Factorization truth = random_factors(15, 10, 2, rng);
    const Matrix t = reconstruct(truth);
    Factorization init = random_factors(15, 10, 5, rng);
    for (std::size_t c = 2; c < 5; ++c) {
      for (double& x : init.theta.row(c)) x = 0.0;
    }
    SolverConfig cfg;
    cfg.max_iters = 200;
    const SolveResult r = solve(t, init, cfg);
    CHECK(std::isfinite(r.trace.costs.back()));
    CHECK(!r.trace.revivals.empty());
    CHECK(r.trace.costs.back() <= r.trace.initial_cost);
  }
}

TEST_SUITE("solve") {
  TEST_CASE("truth init converges in one iteration") {
    std::mt19937_64 rng(14);
    const Factorization truth = random_factors(12, 9, 3, rng);
    const Matrix t = reconstruct(truth);
    const SolveResult r = solve(t, truth);
    CHECK(r.trace.costs.size() == 1);
    CHECK(r.converged);
    CHECK(r.trace.costs[0] <= 1e-20 * squared_frobenius(t));
  }

  TEST_CASE("rel_tol = 0 runs exactly max_iters") {
    std::mt19937_64 rng(15);
    const Matrix t = random_matrix(8, 6, rng, 0.0, 1.0);
    SolverConfig cfg;
    cfg.rel_tol = 0.0;
    cfg.max_iters = 5;
    const SolveResult r = solve(t, random_factors(8, 6, 2, rng), cfg);
    CHECK(r.trace.costs.size() == 5);
    CHECK_FALSE(r.converged);
  }

  TEST_CASE("negative data is reported with coordinates") {
    Matrix t(3, 3, 1.0);
    t(1, 2) = -0.5;
    try {
      solve(t, {Matrix(3, 1, 1.0), Matrix(1, 3, 1.0)});
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Validation);
      CHECK(std::string(e.what()).find("(1, 2)") != std::string::npos);
    }
  }

  TEST_CASE("negative init is rejected") {
    CHECK_THROWS_AS(solve(Matrix(2, 2, 1.0), {Matrix{{1}, {-1}}, Matrix{{1, 1}}}), Error);
  }

  TEST_CASE("rank above min(N, M) is rejected") {
    CHECK_THROWS_AS(solve(Matrix(2, 3, 1.0), {Matrix(2, 3, 1.0), Matrix(3, 3, 1.0)}), Error);
  }

  TEST_CASE("invalid solver config") {
    SolverConfig cfg;
    cfg.max_iters = 0;
    CHECK_THROWS_AS(solve(Matrix(2, 2, 1.0), {Matrix(2, 1, 1.0), Matrix(1, 2, 1.0)}, cfg), Error);
  }

  TEST_CASE("transposed problem with mirrored order gives the same trace") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix t = random_matrix(14, 9, rng, 0.0, 1.0);
      const Factorization f = random_factors(14, 9, 3, rng);
      SolverConfig cfg;
      cfg.rel_tol = 0.0;
      cfg.max_iters = 30;
      const SolveResult a = solve(t, f, cfg);
      cfg.order = SweepOrder::ProfilesFirst;
      const SolveResult b = solve(t.transposed(), {f.theta.transposed(), f.w.transposed()}, cfg);
      REQUIRE(a.trace.costs.size() == b.trace.costs.size());
      for (std::size_t i = 0; i < a.trace.costs.size(); ++i) {
        CHECK(std::abs(a.trace.costs[i] - b.trace.costs[i]) <= 1e-10 * a.trace.costs[0]);
      }
    }
  }

  TEST_CASE("normalize_output yields unit L1 rows and keeps the product") {
    std::mt19937_64 rng(18);
    const Matrix t = random_matrix(10, 8, rng, 0.0, 2.0);
    const Factorization init = random_factors(10, 8, 3, rng);
    SolverConfig cfg;
    cfg.max_iters = 50;
    const SolveResult raw = solve(t, init, cfg);
    cfg.normalize_output = true;
    const SolveResult norm = solve(t, init, cfg);
    CHECK(rel_frobenius_diff(reconstruct(norm.factors), reconstruct(raw.factors)) <= 1e-12);
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (double x : norm.factors.theta.row(c)) s += x;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_SUITE("normalize") {
  TEST_CASE("direct arithmetic") {
    const NormalizeResult r = normalize({Matrix{{1}, {3}}, Matrix{{2, 2}}});
    CHECK(r.factors.theta == Matrix{{0.5, 0.5}});
    CHECK(r.factors.w == Matrix{{4}, {12}});
    CHECK(r.l1_norms == std::vector<double>{4});
  }

  TEST_CASE("idempotent") {
    std::mt19937_64 rng(20);
    const NormalizeResult once = normalize(random_factors(7, 6, 3, rng));
    const NormalizeResult twice = normalize(once.factors);
    CHECK(max_abs_diff(once.factors.theta, twice.factors.theta) <= 1e-15);
    CHECK(max_abs_diff(once.factors.w, twice.factors.w) <= 1e-12);
  }

  TEST_CASE("product is invariant") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const Factorization f = random_factors(9, 7, 4, rng);
      const NormalizeResult r = normalize(f);
      CHECK(rel_frobenius_diff(reconstruct(r.factors), reconstruct(f)) <= 1e-12);
    }
  }

  TEST_CASE("zero rows are reported and untouched") {
    const NormalizeResult r = normalize({Matrix{{1, 2}}, Matrix{{0, 0}, {1, 3}}});
    CHECK(r.zero_rows == std::vector<std::size_t>{0});
    CHECK(r.factors.w(0, 0) == 1.0);
    CHECK(r.factors.theta(1, 1) == 0.75);
  }
}

TEST_SUITE("reconstruct") {
  TEST_CASE("outer product") {
    CHECK(reconstruct({Matrix{{1}, {2}}, Matrix{{3, 4}}}) == Matrix{{3, 4}, {6, 8}});
  }

  TEST_CASE("zero weights") {
    CHECK(max_abs(reconstruct({Matrix(3, 2), Matrix(2, 4, 1.0)})) == 0.0);
  }

  TEST_CASE("equals matmul") {
    std::mt19937_64 rng(22);
    const Factorization f = random_factors(5, 4, 2, rng);
    CHECK(reconstruct(f) == matmul(f.w, f.theta));
  }
}
