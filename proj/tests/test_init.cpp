#include <doctest.h>

#include <cmath>
#include <random>

#include "heatnmf/error.hpp"
#include "heatnmf/init.hpp"
#include "heatnmf/linalg.hpp"
#include "heatnmf/nmf.hpp"
#include "test_support.hpp"

using namespace heatnmf;
using namespace heatnmf::testing;

namespace {

ComponentSpec cooling(double tau, double amp = 1.0) {
  return {ComponentKind::CoolingExp, amp, tau, 1.0, 0.0};
}
ComponentSpec heating(double tau, double amp = 1.0) {
  return {ComponentKind::HeatingExp, amp, 1.0, tau, 0.0};
}
ComponentSpec bath(double tau_c, double tau_h, double amp = 1.0) {
  return {ComponentKind::BathPulse, amp, tau_c, tau_h, 0.0};
}

Matrix stack(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return m;
}

// 3x3 inverse by cofactors.
Matrix inverse3(const Matrix& a) {
  const double det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                     a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                     a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  Matrix inv(3, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv(i, j) = (a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0)) / det;
    }
  }
  return inv;
}

}  // namespace

TEST_SUITE("time_vector") {
  TEST_CASE("recording span of 32 samples over 155 s") {
    const TimeGrid g = time_vector(32, 155.0 / 31.0);
    CHECK(g.dt() == doctest::Approx(5.0));
    CHECK(g.t_end() == doctest::Approx(155.0));
    CHECK(g[0] == 0.0);
  }

  TEST_CASE("single sample") {
    const TimeGrid g = time_vector(1, 1.0);
    CHECK(g.size() == 1);
    CHECK(g[0] == 0.0);
  }

  TEST_CASE("half steps") {
    const TimeGrid g = time_vector(4, 0.5);
    CHECK(std::vector<double>(g.values().begin(), g.values().end()) == std::vector<double>{0, 0.5, 1.0, 1.5});
  }

  TEST_CASE("invalid grids") {
    CHECK_THROWS_AS(time_vector(0, 1.0), Error);
    CHECK_THROWS_AS(time_vector(4, 0.0), Error);
    CHECK_THROWS_AS(time_vector(4, -1.0), Error);
  }
}

TEST_SUITE("component_curve") {
  TEST_CASE("heating starts at zero and saturates") {
    const TimeGrid g = time_vector(11, 2.0);  // t_end = 20 = 10 tau
    const auto c = component_curve(heating(2.0, 3.0), g);
    CHECK(c[0] == 0.0);
    CHECK(c.back() >= 0.9999 * 3.0);
    CHECK(c.back() <= 3.0);
  }

  TEST_CASE("cooling starts at amp and drops to amp/e after one time constant") {
    const TimeGrid g = time_vector(3, 7.0);
    const auto c = component_curve(cooling(7.0, 2.0), g);
    CHECK(c[0] == 2.0);
    CHECK(c[1] == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-15));
  }

  TEST_CASE("bath pulse argmax brackets the analytic peak") {
    for (auto [tc, th] : {std::pair{50.0, 10.0}, std::pair{155.0 / 3, 155.0 / 12}, std::pair{30.0, 29.0}}) {
      const double peak = (std::log(tc) - std::log(th)) * tc * th / (tc - th);
      const TimeGrid g = time_vector(200, 1.0);
      const auto c = component_curve(bath(tc, th), g);
      const std::size_t arg =
          static_cast<std::size_t>(std::distance(c.begin(), std::max_element(c.begin(), c.end())));
      CHECK(g[arg - 1] <= peak);
      CHECK(peak <= g[arg + 1]);
      for (double x : c) CHECK(x >= 0.0);
    }
  }

  TEST_CASE("bath pulse needs tau_c > tau_h") {
    const TimeGrid g = time_vector(5, 1.0);
    CHECK_THROWS_AS(component_curve(bath(5.0, 10.0), g), Error);
    CHECK_THROWS_AS(component_curve(bath(5.0, 5.0), g), Error);
  }

  TEST_CASE("heat kernel at t = 0") {
    const TimeGrid g = time_vector(4, 2.0);
    const auto far = component_curve({ComponentKind::HeatKernel, 1.0, 1.0, 1.0, 3.0}, g);
    CHECK(far[0] == 0.0);
    CHECK(far[1] == doctest::Approx(std::exp(-9.0 / 8.0) / std::sqrt(8.0 * M_PI)));
    const auto near = component_curve({ComponentKind::HeatKernel, 1.0, 1.0, 1.0, 0.0}, g);
    CHECK(near[0] == near[1]);
    CHECK(near[1] == doctest::Approx(1.0 / std::sqrt(8.0 * M_PI)));
  }

  TEST_CASE("mean curve needs the data mean") {
    const TimeGrid g = time_vector(3, 1.0);
    CHECK_THROWS_AS(component_curve({ComponentKind::MeanCurve}, g), Error);
    const std::vector<double> mean{1, 2, 3};
    CHECK(component_curve({ComponentKind::MeanCurve}, g, std::span<const double>(mean)) == mean);
  }

  TEST_CASE("non-positive parameters are rejected") {
    const TimeGrid g = time_vector(3, 1.0);
    CHECK_THROWS_AS(component_curve(cooling(0.0), g), Error);
    CHECK_THROWS_AS(component_curve(heating(2.0, -1.0), g), Error);
  }

  TEST_CASE("defaults follow the recording span") {
    const ComponentSpec c = resolve({ComponentKind::CoolingExp}, 155.0, 20.0);
    CHECK(c.tau_c == doctest::Approx(155.0 / 3));
    CHECK(c.amp == 20.0);
    const ComponentSpec b = resolve({ComponentKind::BathPulse}, 155.0, 20.0);
    CHECK(b.tau_c == doctest::Approx(155.0 / 3));
    CHECK(b.tau_h == doctest::Approx(155.0 / 12));
    const ComponentSpec h = resolve({ComponentKind::HeatingExp, 4.0, {}, 9.0, {}}, 155.0, 20.0);
    CHECK(h.tau_h == 9.0);
    CHECK(h.amp == 4.0);
  }
}

TEST_SUITE("knowledge_init") {
  TEST_CASE("data made of one curve gives unit weights") {
    const TimeGrid g = time_vector(32, 5.0);
    const ComponentSpec spec = cooling(40.0, 25.0);
    const auto curve = component_curve(spec, g);
    Matrix t(10, 32);
    for (std::size_t i = 0; i < 10; ++i) std::copy(curve.begin(), curve.end(), t.row(i).begin());
    const InitResult r = knowledge_init(t, g, std::vector{spec});
    CHECK(r.diagnostics.clamped_entries == 0);
    for (double x : r.w_init.data()) CHECK(std::abs(x - 1.0) <= 1e-10);
  }

  TEST_CASE("planted explicit curves are recovered exactly") {
    const TimeGrid g = time_vector(32, 5.0);
    const std::vector<ComponentSpec> specs{cooling(30.0, 10.0), bath(50.0, 12.0, 8.0), heating(20.0, 5.0)};
    std::vector<std::vector<double>> rows;
    for (const auto& s : specs) rows.push_back(component_curve(s, g));
    std::mt19937_64 rng(3);
    const Matrix w = random_matrix(25, 3, rng, 0.1, 2.0);
    const Matrix t = matmul(w, stack(rows));
    const InitResult r = knowledge_init(t, g, specs);
    CHECK(r.diagnostics.clamped_entries == 0);
    CHECK(max_abs_diff(r.w_init, w) <= 1e-8);
  }

  TEST_CASE("with a mean row the weights follow the change of basis") {
    // T = W [b; cooling; bath]. The mean row of T is wbar^T [b; cooling; bath],
    // so the initial weights must equal clamp(W B^-1) with B = [wbar; e2; e3].
    const TimeGrid g = time_vector(32, 5.0);
    std::vector<std::vector<double>> rows{component_curve(cooling(400.0, 20.0), g),
                                          component_curve(cooling(30.0, 10.0), g),
                                          component_curve(bath(50.0, 12.0, 8.0), g)};
    std::mt19937_64 rng(4);
    const Matrix w = random_matrix(30, 3, rng, 0.1, 2.0);
    const Matrix t = matmul(w, stack(rows));

    Matrix b = Matrix::identity(3);
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.rows(); ++i) s += w(i, c);
      b(0, c) = s / static_cast<double>(w.rows());
    }
    Matrix expected = naive_matmul(w, inverse3(b));
    std::size_t negatives = 0;
    for (double& x : expected.data()) {
      if (x < 0.0) {
        x = 0.0;
        ++negatives;
      }
    }
    const InitResult r = knowledge_init(
        t, g, std::vector{ComponentSpec{ComponentKind::MeanCurve}, cooling(30.0, 10.0), bath(50.0, 12.0, 8.0)});
    CHECK(r.diagnostics.clamped_entries == negatives);
    CHECK(max_abs_diff(r.w_init, expected) <= 1e-8);
  }

  TEST_CASE("four default curves on a 540x32 dataset") {
    const TimeGrid g = time_vector(32, 5.0);
    std::mt19937_64 rng(5);
    const Matrix t = random_matrix(540, 32, rng, 10.0, 200.0);
    const InitResult r = initialize(InitStrategy::Knowledge, t, g, 4, {}, 0);
    CHECK(r.w_init.rows() == 540);
    CHECK(r.w_init.cols() == 4);
    CHECK(r.theta_init.rows() == 4);
    CHECK(r.theta_init.cols() == 32);
    for (double x : r.w_init.data()) CHECK(x >= 0.0);
    for (double x : r.theta_init.data()) CHECK(x >= 0.0);
  }

  TEST_CASE("without clamps the residual is orthogonal to the profile rows") {
    const TimeGrid g = time_vector(32, 5.0);
    const std::vector<ComponentSpec> specs{cooling(30.0, 10.0), heating(20.0, 5.0)};
    std::vector<std::vector<double>> rows;
    for (const auto& s : specs) rows.push_back(component_curve(s, g));
    std::mt19937_64 rng(6);
    Matrix t = matmul(random_matrix(20, 2, rng, 5.0, 10.0), stack(rows));
    t = t + random_matrix(20, 32, rng, 0.0, 0.1);
    const InitResult r = knowledge_init(t, g, specs);
    REQUIRE(r.diagnostics.clamped_entries == 0);
    const Matrix resid = t - matmul(r.w_init, r.theta_init);
    const Matrix proj = naive_matmul(resid, r.theta_init.transposed());
    CHECK(max_abs(proj) <= 1e-8 * frobenius(t) * frobenius(r.theta_init));
  }

  TEST_CASE("duplicate curves give a warning") {
    const TimeGrid g = time_vector(8, 1.0);
    std::mt19937_64 rng(7);
    const Matrix t = random_matrix(5, 8, rng, 0.0, 1.0);
    const InitResult r = knowledge_init(t, g, std::vector{cooling(2.0), cooling(2.0)});
    CHECK(r.diagnostics.warnings.size() == 1);
  }

  TEST_CASE("rank too large") {
    const TimeGrid g = time_vector(3, 1.0);
    const Matrix t(2, 3, 1.0);
    CHECK_THROWS_AS(knowledge_init(t, g, std::vector{cooling(1.0), cooling(2.0), cooling(3.0)}), Error);
  }

  TEST_CASE("spec count must match k") {
    const TimeGrid g = time_vector(4, 1.0);
    const std::vector<ComponentTemplate> one{{ComponentKind::CoolingExp}};
    CHECK_THROWS_AS(initialize(InitStrategy::Knowledge, Matrix(4, 4, 1.0), g, 2, one, 0), Error);
    CHECK_THROWS_AS(default_templates(5), Error);
  }
}

TEST_SUITE("nndsvd_init") {
  TEST_CASE("rank-one data is captured by the first component") {
    const std::vector<double> x{1, 2, 0.5, 3, 0};
    const std::vector<double> y{4, 1, 2, 0.25};
    const Matrix t = outer(x, y);
    const InitResult r = nndsvd_init(t, 2);
    const Matrix first = outer(r.w_init.col(0), r.theta_init.row(0));
    CHECK(rel_frobenius_diff(first, t) <= 1e-10);
    const Matrix second = outer(r.w_init.col(1), r.theta_init.row(1));
    CHECK(frobenius(second) <= 1e-10 * frobenius(t));
  }

  TEST_CASE("positive sections have rank <= 2 and the stated singular values") {
    std::mt19937_64 rng(9);
    const Matrix t = random_matrix(40, 32, rng, 0.0, 1.0);
    for (const SectionTriplet& s : nndsvd_sections(t, 4)) {
      // Positive section via the element-wise split of sigma u v^T.
      const std::vector<double> u = [&] {
        std::vector<double> out(s.u_pos.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.u_pos[i] - s.u_neg[i];
        return out;
      }();
      std::vector<double> v(s.v_pos.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = s.v_pos[i] - s.v_neg[i];
      const Matrix section = split_sections(s.sigma * outer(u, v)).first;
      const SvdResult sv = svd(section);
      CHECK(sv.sigma[2] <= 1e-10 * sv.sigma[0]);
      const double hi = std::max(s.mu_pos(), s.mu_neg());
      const double lo = std::min(s.mu_pos(), s.mu_neg());
      CHECK(std::abs(sv.sigma[0] - hi) <= 1e-10 * std::max(1.0, hi));
      CHECK(std::abs(sv.sigma[1] - lo) <= 1e-10 * std::max(1.0, hi));
    }
  }

  TEST_CASE("choice is invariant to flipping the singular pair") {
    std::mt19937_64 rng(10);
    const Matrix t = random_matrix(12, 9, rng, 0.0, 1.0);
    const InitResult r = nndsvd_init(t, 4);
    const auto sections = nndsvd_sections(t, 4);
    for (std::size_t j = 1; j < 4; ++j) {
      const SectionTriplet& s = sections[j];
      const SectionTriplet flipped{s.sigma, s.u_neg, s.u_pos, s.v_neg, s.v_pos};
      const bool pos = s.mu_pos() >= s.mu_neg();
      const bool flipped_pos = flipped.mu_pos() >= flipped.mu_neg();
      const auto& u = pos ? s.u_pos : s.u_neg;
      const auto& v = pos ? s.v_pos : s.v_neg;
      const auto& fu = flipped_pos ? flipped.u_pos : flipped.u_neg;
      const auto& fv = flipped_pos ? flipped.v_pos : flipped.v_neg;
      CHECK(max_abs_diff(outer(u, v), outer(fu, fv)) == 0.0);
      CHECK(max_abs_diff(s.sigma * outer(u, v), outer(r.w_init.col(j), r.theta_init.row(j))) <= 1e-12);
    }
  }

  TEST_CASE("deterministic and non-negative") {
    std::mt19937_64 rng(11);
    const Matrix t = random_matrix(30, 20, rng, 0.0, 5.0);
    const InitResult a = nndsvd_init(t, 3);
    const InitResult b = nndsvd_init(t, 3);
    CHECK(a.w_init == b.w_init);
    CHECK(a.theta_init == b.theta_init);
    for (double x : a.w_init.data()) CHECK(x >= 0.0);
    for (double x : a.theta_init.data()) CHECK(x >= 0.0);
  }

  TEST_CASE("negative data is rejected") {
    CHECK_THROWS_AS(nndsvd_init(Matrix{{1, -1}, {1, 1}}, 1), Error);
  }
}

TEST_SUITE("random_init") {
  TEST_CASE("seeded determinism") {
    const Matrix t(6, 5, 2.0);
    const InitResult a = random_init(t, 2, 42);
    const InitResult b = random_init(t, 2, 42);
    const InitResult c = random_init(t, 2, 43);
    CHECK(a.w_init == b.w_init);
    CHECK(a.theta_init == b.theta_init);
    CHECK_FALSE(a.w_init == c.w_init);
  }

  TEST_CASE("entries lie in (0, sqrt(mean / k)]") {
    const Matrix t(50, 32, 8.0);
    const InitResult r = random_init(t, 2, 1);
    for (const Matrix* m : {&r.w_init, &r.theta_init}) {
      for (double x : m->data()) {
        CHECK(x > 0.0);
        CHECK(x <= 2.0);
      }
    }
  }

  TEST_CASE("rank too large") { CHECK_THROWS_AS(random_init(Matrix(2, 2, 1.0), 3, 0), Error); }
}
