#include "heatnmf/init.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "heatnmf/error.hpp"
#include "heatnmf/linalg.hpp"
#include "heatnmf/nmf.hpp"

namespace heatnmf {

namespace {

void require_rank(const Matrix& t, std::size_t k, const char* who) {
  if (k < 1 || k > std::min(t.rows(), t.cols())) {
    throw validation_error(std::string(who) + ": rank k=" + std::to_string(k) +
                           " must satisfy 1 <= k <= min(N, M) = " +
                           std::to_string(std::min(t.rows(), t.cols())));
  }
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

TimeGrid::TimeGrid(std::size_t m, double dt) : dt_(dt) {
  if (m == 0) throw validation_error("time grid: need at least one sample");
  if (!positive_finite(dt)) throw validation_error("time grid: dt must be positive");
  values_.resize(m);
  for (std::size_t i = 0; i < m; ++i) values_[i] = static_cast<double>(i) * dt;
}

TimeGrid time_vector(std::size_t m, double dt) { return TimeGrid(m, dt); }

const char* to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::MeanCurve: return "mean";
    case ComponentKind::CoolingExp: return "cooling";
    case ComponentKind::HeatingExp: return "heating";
    case ComponentKind::BathPulse: return "bath";
    case ComponentKind::HeatKernel: return "kernel";
  }
  return "?";
}

const char* to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::Random: return "random";
    case InitStrategy::Nndsvd: return "nndsvd";
    case InitStrategy::Knowledge: return "knowledge";
  }
  return "?";
}

ComponentSpec resolve(const ComponentTemplate& tmpl, double t_end, double default_amp) {
  ComponentSpec spec;
  spec.kind = tmpl.kind;
  spec.amp = tmpl.amp.value_or(default_amp);
  if (tmpl.kind == ComponentKind::BathPulse) {
    spec.tau_c = tmpl.tau_c.value_or(t_end / 3.0);
    spec.tau_h = tmpl.tau_h.value_or(t_end / 12.0);
  } else {
    spec.tau_c = tmpl.tau_c.value_or(t_end / 3.0);
    spec.tau_h = tmpl.tau_h.value_or(t_end / 10.0);
  }
  spec.r = tmpl.r.value_or(0.0);
  return spec;
}

std::vector<ComponentTemplate> default_templates(std::size_t k) {
  static const ComponentKind order[] = {ComponentKind::MeanCurve, ComponentKind::BathPulse,
                                        ComponentKind::CoolingExp, ComponentKind::HeatingExp};
  if (k > std::size(order)) {
    throw validation_error("knowledge init: no default curves for k=" + std::to_string(k) +
                           " (at most 4); supply a component spec file");
  }
  std::vector<ComponentTemplate> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i].kind = order[i];
  return out;
}

void validate(const ComponentSpec& spec) {
  const std::string name = to_string(spec.kind);
  if (spec.kind != ComponentKind::MeanCurve && !positive_finite(spec.amp)) {
    throw validation_error(name + " component: amp must be positive");
  }
  switch (spec.kind) {
    case ComponentKind::MeanCurve:
      break;
    case ComponentKind::CoolingExp:
      if (!positive_finite(spec.tau_c)) throw validation_error(name + " component: tau_c must be positive");
      break;
    case ComponentKind::HeatingExp:
      if (!positive_finite(spec.tau_h)) throw validation_error(name + " component: tau_h must be positive");
      break;
    case ComponentKind::BathPulse:
      if (!positive_finite(spec.tau_c) || !positive_finite(spec.tau_h)) {
        throw validation_error(name + " component: tau_c and tau_h must be positive");
      }
      if (spec.tau_c <= spec.tau_h) {
        throw validation_error(name + " component: tau_c must exceed tau_h or the curve goes negative");
      }
      break;
    case ComponentKind::HeatKernel:
      if (!(std::isfinite(spec.r) && spec.r >= 0.0)) {
        throw validation_error(name + " component: r must be >= 0");
      }
      break;
  }
}

std::vector<double> component_curve(const ComponentSpec& spec, const TimeGrid& grid,
                                    std::optional<std::span<const double>> data_mean) {
  validate(spec);
  const std::size_t m = grid.size();
  std::vector<double> out(m);
  switch (spec.kind) {
    case ComponentKind::MeanCurve:
      if (!data_mean || data_mean->size() != m) {
        throw validation_error("mean component: needs the data mean curve of length " + std::to_string(m));
      }
      out.assign(data_mean->begin(), data_mean->end());
      break;
    case ComponentKind::CoolingExp:
      for (std::size_t i = 0; i < m; ++i) out[i] = spec.amp * std::exp(-grid[i] / spec.tau_c);
      break;
    case ComponentKind::HeatingExp:
      for (std::size_t i = 0; i < m; ++i) out[i] = spec.amp * -std::expm1(-grid[i] / spec.tau_h);
      break;
    case ComponentKind::BathPulse:
      for (std::size_t i = 0; i < m; ++i) {
        const double v = std::exp(-grid[i] / spec.tau_c) - std::exp(-grid[i] / spec.tau_h);
        out[i] = spec.amp * std::max(0.0, v);
      }
      break;
    case ComponentKind::HeatKernel: {
      const auto kernel = [&](double t) {
        return spec.amp / std::sqrt(4.0 * std::numbers::pi * t) * std::exp(-spec.r * spec.r / (4.0 * t));
      };
      for (std::size_t i = 0; i < m; ++i) {
        if (grid[i] > 0.0) {
          out[i] = kernel(grid[i]);
        } else {
          // Singular at t = 0: zero for r > 0 and the first-step value at r = 0.
          out[i] = spec.r > 0.0 ? 0.0 : kernel(grid.dt());
        }
      }
      break;
    }
  }
  return out;
}

std::vector<double> column_mean(const Matrix& t) {
  std::vector<double> mean(t.cols(), 0.0);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto r = t.row(i);
    for (std::size_t j = 0; j < t.cols(); ++j) mean[j] += r[j];
  }
  for (double& x : mean) x /= static_cast<double>(t.rows());
  return mean;
}

InitResult knowledge_init(const Matrix& t, const TimeGrid& grid, std::span<const ComponentSpec> specs) {
  if (specs.empty()) throw validation_error("knowledge init: need at least one component");
  if (grid.size() != t.cols()) {
    throw validation_error("knowledge init: grid has " + std::to_string(grid.size()) +
                           " samples but data has " + std::to_string(t.cols()) + " columns");
  }
  require_rank(t, specs.size(), "knowledge init");

  const std::size_t k = specs.size();
  const std::vector<double> mean = column_mean(t);
  Matrix theta(k, t.cols());
  for (std::size_t c = 0; c < k; ++c) {
    const std::vector<double> curve = component_curve(specs[c], grid, std::span<const double>(mean));
    std::copy(curve.begin(), curve.end(), theta.row(c).begin());
  }

  InitResult result{Matrix{}, theta, InitStrategy::Knowledge, {}};
  const double scale = std::max(1.0, max_abs(theta));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double diff = 0.0;
      for (std::size_t j = 0; j < t.cols(); ++j) diff = std::max(diff, std::abs(theta(a, j) - theta(b, j)));
      if (diff <= 1e-12 * scale) {
        result.diagnostics.warnings.push_back("components " + std::to_string(a) + " and " +
                                              std::to_string(b) + " have identical curves");
      }
    }
  }

  Matrix w = matmul(t, pinv(theta));
  for (double& x : w.data()) {
    if (x < 0.0) {
      x = 0.0;
      ++result.diagnostics.clamped_entries;
    }
  }
  result.w_init = std::move(w);
  return result;
}

double SectionTriplet::mu_pos() const { return norm2(u_pos) * norm2(v_pos) * sigma; }
double SectionTriplet::mu_neg() const { return norm2(u_neg) * norm2(v_neg) * sigma; }

std::vector<SectionTriplet> nndsvd_sections(const Matrix& t, std::size_t k) {
  require_rank(t, k, "nndsvd");
  const SvdResult s = svd(t);
  std::vector<SectionTriplet> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::vector<double> u = s.u.col(j);
    const std::vector<double> v = s.v.col(j);
    out.push_back({s.sigma[j], positive_part(u), negative_part(u), positive_part(v), negative_part(v)});
  }
  return out;
}

InitResult nndsvd_init(const Matrix& t, std::size_t k) {
  require_finite(t, "nndsvd input");
  require_nonnegative(t, "nndsvd input");
  const std::vector<SectionTriplet> sections = nndsvd_sections(t, k);

  InitResult result{Matrix(t.rows(), k), Matrix(k, t.cols()), InitStrategy::Nndsvd, {}};
  for (std::size_t j = 0; j < k; ++j) {
    const SectionTriplet& s = sections[j];
    NndsvdChoice choice{s.sigma, s.mu_pos(), s.mu_neg(), true};
    // The leading pair of a non-negative matrix is non-negative, so the
    // positive triplet is the whole term.
    if (j > 0 && choice.mu_neg > choice.mu_pos) choice.took_positive = false;

    const auto& u = choice.took_positive ? s.u_pos : s.u_neg;
    const auto& v = choice.took_positive ? s.v_pos : s.v_neg;
    const double mu = choice.took_positive ? choice.mu_pos : choice.mu_neg;
    const double nu = norm2(u);
    const double nv = norm2(v);
    if (mu > 0.0 && nu > 0.0 && nv > 0.0) {
      const double root = std::sqrt(mu);
      for (std::size_t i = 0; i < t.rows(); ++i) result.w_init(i, j) = root * u[i] / nu;
      for (std::size_t i = 0; i < t.cols(); ++i) result.theta_init(j, i) = root * v[i] / nv;
    }
    result.diagnostics.nndsvd.push_back(choice);
  }
  return result;
}

InitResult random_init(const Matrix& t, std::size_t k, std::uint64_t seed) {
  require_rank(t, k, "random init");
  double mean = 0.0;
  for (double x : t.data()) mean += x;
  mean /= static_cast<double>(t.size());
  InitResult result{Matrix(t.rows(), k), Matrix(k, t.cols()), InitStrategy::Random, {}};
  double s = std::sqrt(mean / static_cast<double>(k));
  if (!(s > 0.0) || !std::isfinite(s)) {
    s = 1.0;
    result.diagnostics.warnings.push_back("data mean is not positive; random scale set to 1");
  }
  std::mt19937_64 rng(seed);
  // Lower bound is the smallest positive double, so no draw is zero.
  std::uniform_real_distribution<double> dist(std::numeric_limits<double>::min(), s);
  for (double& x : result.w_init.data()) x = dist(rng);
  for (double& x : result.theta_init.data()) x = dist(rng);
  return result;
}

InitResult initialize(InitStrategy strategy, const Matrix& t, const TimeGrid& grid, std::size_t k,
                      std::span<const ComponentTemplate> templates, std::uint64_t seed) {
  switch (strategy) {
    case InitStrategy::Random:
      return random_init(t, k, seed);
    case InitStrategy::Nndsvd:
      return nndsvd_init(t, k);
    case InitStrategy::Knowledge: {
      std::vector<ComponentTemplate> chosen =
          templates.empty() ? default_templates(k)
                            : std::vector<ComponentTemplate>(templates.begin(), templates.end());
      if (chosen.size() != k) {
        throw validation_error("knowledge init: component spec lists " + std::to_string(chosen.size()) +
                               " curves but k=" + std::to_string(k));
      }
      double lo = 0.0;
      double hi = 0.0;
      if (!t.empty()) {
        const auto [mn, mx] = std::minmax_element(t.data().begin(), t.data().end());
        lo = *mn;
        hi = *mx;
      }
      double amp = hi - lo;
      if (!(amp > 0.0)) amp = hi > 0.0 ? hi : 1.0;
      std::vector<ComponentSpec> specs;
      specs.reserve(k);
      for (const auto& tmpl : chosen) specs.push_back(resolve(tmpl, grid.t_end(), amp));
      return knowledge_init(t, grid, specs);
    }
  }
  throw validation_error("unknown init strategy");
}

}  // namespace heatnmf
