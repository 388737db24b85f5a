#include "heatnmf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "heatnmf/error.hpp"
#include "heatnmf/linalg.hpp"

namespace heatnmf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> l1_normalized(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  std::vector<double> out(x.begin(), x.end());
  if (s > 0.0) {
    for (double& v : out) v /= s;
  }
  return out;
}

}  // namespace

std::vector<double> generate_weights(const WeightModel& model, std::size_t n, std::mt19937_64& rng) {
  std::vector<double> w(n);
  std::visit(
      overloaded{
          [&](const weights::Constant& c) { std::fill(w.begin(), w.end(), c.value); },
          [&](const weights::LinearDrift& d) {
            for (std::size_t i = 0; i < n; ++i) {
              const double f = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
              w[i] = d.start + (d.end - d.start) * f;
            }
          },
          [&](const weights::Periodic& p) {
            if (!(p.period > 0.0)) throw validation_error("periodic weights: period must be positive");
            for (std::size_t i = 0; i < n; ++i) {
              const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / p.period;
              w[i] = p.base + p.amp * (0.5 + 0.5 * std::sin(phase));
            }
          },
          [&](const weights::RandomWalk& r) {
            if (!(r.step >= 0.0)) throw validation_error("random-walk weights: step must be >= 0");
            std::normal_distribution<double> step(0.0, r.step);
            double x = r.start;
            for (std::size_t i = 0; i < n; ++i) {
              w[i] = x;
              x = std::abs(x + (r.step > 0.0 ? step(rng) : 0.0));
            }
          },
      },
      model);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw validation_error("weight model produces a negative or non-finite weight at recording " +
                             std::to_string(i));
    }
  }
  return w;
}

GroundTruth generate(const SyntheticSpec& spec) {
  const std::size_t k = spec.components.size();
  const std::size_t m = spec.grid.size();
  if (spec.n < 1) throw validation_error("synthetic spec: need at least one recording");
  if (k < 1) throw validation_error("synthetic spec: need at least one component");
  if (k > std::min(spec.n, m)) {
    throw validation_error("synthetic spec: " + std::to_string(k) + " components exceed min(n, m)");
  }
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw validation_error("synthetic spec: noise must be >= 0");
  }

  GroundTruth g;
  g.theta_true = Matrix(k, m);
  g.w_true = Matrix(spec.n, k);
  std::mt19937_64 rng(spec.seed);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& comp = spec.components[c];
    if (comp.curve.kind == ComponentKind::MeanCurve) {
      throw validation_error("synthetic spec: component " + std::to_string(c) +
                             " is a mean curve, which needs measured data");
    }
    const std::vector<double> curve = component_curve(comp.curve, spec.grid);
    std::copy(curve.begin(), curve.end(), g.theta_true.row(c).begin());
    g.w_true.set_col(c, generate_weights(comp.weights, spec.n, rng));
  }
  g.t_clean = matmul(g.w_true, g.theta_true);
  g.t_noisy = g.t_clean;

  double sigma = spec.noise_sigma;
  if (spec.noise_scale == NoiseScale::RangeFraction) {
    const auto [lo, hi] = std::minmax_element(g.t_clean.data().begin(), g.t_clean.data().end());
    sigma *= (*hi - *lo);
  }
  g.noise_std = sigma;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& x : g.t_noisy.data()) {
      x += noise(rng);
      if (x < 0.0) {
        x = 0.0;
        ++g.clamped_noise;
      }
    }
  }
  return g;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n) return std::numeric_limits<double>::quiet_NaN();
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

double MatchReport::total_cosine() const { return std::accumulate(cosines.begin(), cosines.end(), 0.0); }

double MatchReport::mean_cosine() const {
  return cosines.empty() ? 0.0 : total_cosine() / static_cast<double>(cosines.size());
}

MatchReport match_components(const Factorization& recovered, const Factorization& truth) {
  const std::size_t k = recovered.theta.rows();
  if (k != truth.theta.rows() || recovered.w.cols() != truth.w.cols() || recovered.w.cols() != k) {
    throw validation_error("match: recovered has K=" + std::to_string(k) + " but truth has K=" +
                           std::to_string(truth.theta.rows()));
  }
  if (k == 0) throw validation_error("match: empty factorization");
  if (k > 8) throw validation_error("match: exhaustive matching supports K <= 8");
  if (recovered.theta.cols() != truth.theta.cols()) {
    throw validation_error("match: profile lengths differ (" + shape_string(recovered.theta) + " vs " +
                           shape_string(truth.theta) + ")");
  }
  if (recovered.w.rows() != truth.w.rows()) {
    throw validation_error("match: weight matrices have different row counts (" +
                           shape_string(recovered.w) + " vs " + shape_string(truth.w) + ")");
  }

  Matrix cos(k, k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto a = l1_normalized(recovered.theta.row(r));
    for (std::size_t t = 0; t < k; ++t) cos(r, t) = cosine(a, l1_normalized(truth.theta.row(t)));
  }

  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_total = -std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < k; ++r) total += cos(r, perm[r]);
    if (total > best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  MatchReport report;
  report.permutation = best;
  for (std::size_t r = 0; r < k; ++r) {
    report.cosines.push_back(cos(r, best[r]));
    report.weight_correlations.push_back(pearson(recovered.w.col(r), truth.w.col(best[r])));
  }
  return report;
}

MatchReport match_components(const Factorization& recovered, const GroundTruth& truth) {
  return match_components(recovered, Factorization{truth.w_true, truth.theta_true});
}

}  // namespace heatnmf
