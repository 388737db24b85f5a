#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "heatnmf/init.hpp"
#include "heatnmf/matrix.hpp"
#include "heatnmf/nmf.hpp"

namespace heatnmf {

namespace weights {
struct Constant {
  double value = 1.0;
};
/// Linear ramp from `start` (first recording) to `end` (last recording).
struct LinearDrift {
  double start = 0.0;
  double end = 1.0;
};
/// base + amp * (0.5 + 0.5 sin(2 pi n / period)).
struct Periodic {
  double base = 0.0;
  double amp = 1.0;
  double period = 50.0;
};
/// Gaussian steps reflected at zero.
struct RandomWalk {
  double start = 1.0;
  double step = 0.05;
};
}  // namespace weights

using WeightModel =
    std::variant<weights::Constant, weights::LinearDrift, weights::Periodic, weights::RandomWalk>;

struct PlantedComponent {
  ComponentSpec curve;
  WeightModel weights;
};

enum class NoiseScale {
  Absolute,       // sigma as given
  RangeFraction,  // sigma * (max - min) of the clean data
};

struct SyntheticSpec {
  std::size_t n = 0;
  TimeGrid grid{1, 1.0};
  std::vector<PlantedComponent> components;
  double noise_sigma = 0.0;
  NoiseScale noise_scale = NoiseScale::Absolute;
  std::uint64_t seed = 0;
};

struct GroundTruth {
  Matrix w_true;
  Matrix theta_true;
  Matrix t_clean;
  Matrix t_noisy;
  double noise_std = 0.0;        // absolute standard deviation applied
  std::size_t clamped_noise = 0; // entries raised back to zero
};

/// Weight trajectory over n recordings; throws on negative values.
std::vector<double> generate_weights(const WeightModel& model, std::size_t n,
                                     std::mt19937_64& rng);

/// Planted superposition T = W Theta plus clamped Gaussian noise.
GroundTruth generate(const SyntheticSpec& spec);

struct MatchReport {
  std::vector<std::size_t> permutation;  // recovered index -> true index
  std::vector<double> cosines;
  std::vector<double> weight_correlations;  // NaN when a column is constant

  double mean_cosine() const;
  double total_cosine() const;
};

/// Best assignment of recovered to true components by total cosine of
/// L1-normalised Theta rows, found exhaustively (K <= 8).
MatchReport match_components(const Factorization& recovered, const Factorization& truth);
MatchReport match_components(const Factorization& recovered, const GroundTruth& truth);

double pearson(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace heatnmf
