#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heatnmf/matrix.hpp"

namespace heatnmf {

/// Sampling grid t_m = m * dt for m = 0..M-1.
class TimeGrid {
 public:
  TimeGrid(std::size_t m, double dt);

  std::size_t size() const noexcept { return values_.size(); }
  double dt() const noexcept { return dt_; }
  double t_end() const noexcept { return values_.back(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  double dt_;
  std::vector<double> values_;
};

/// Validating factory; same as the constructor.
TimeGrid time_vector(std::size_t m, double dt);

enum class ComponentKind { MeanCurve, CoolingExp, HeatingExp, BathPulse, HeatKernel };

const char* to_string(ComponentKind kind);

/// One physical curve family with its parameters. Only the parameters
/// relevant to `kind` are consulted.
struct ComponentSpec {
  ComponentKind kind = ComponentKind::MeanCurve;
  double amp = 1.0;
  double tau_c = 1.0;  // seconds
  double tau_h = 1.0;  // seconds
  double r = 0.0;      // distance, HeatKernel only
};

/// A component as written in a spec file: unset parameters take defaults
/// derived from the grid and the data.
struct ComponentTemplate {
  ComponentKind kind = ComponentKind::MeanCurve;
  std::optional<double> amp;
  std::optional<double> tau_c;
  std::optional<double> tau_h;
  std::optional<double> r;
};

/// Default parameters: tau_c = t_end/3, tau_h = t_end/10, bath pulse
/// (t_end/3, t_end/12), amp = max(T) - min(T).
ComponentSpec resolve(const ComponentTemplate& tmpl, double t_end, double default_amp);

/// Curve defaults for rank k: mean, bath pulse, cooling, heating (truncated).
std::vector<ComponentTemplate> default_templates(std::size_t k);

/// Throws a validation error if the parameters cannot produce a valid
/// non-negative curve.
void validate(const ComponentSpec& spec);

/// Samples the curve on the grid. MeanCurve returns `data_mean` unchanged.
std::vector<double> component_curve(const ComponentSpec& spec, const TimeGrid& grid,
                                    std::optional<std::span<const double>> data_mean = {});

/// Per-column mean of T.
std::vector<double> column_mean(const Matrix& t);

enum class InitStrategy { Random, Nndsvd, Knowledge };

const char* to_string(InitStrategy s);

/// Triplet choice made by NNDSVD for one component.
struct NndsvdChoice {
  double sigma = 0.0;
  double mu_pos = 0.0;
  double mu_neg = 0.0;
  bool took_positive = true;
};

struct InitDiagnostics {
  std::size_t clamped_entries = 0;
  std::vector<std::string> warnings;
  std::vector<NndsvdChoice> nndsvd;
};

struct InitResult {
  Matrix w_init;
  Matrix theta_init;
  InitStrategy strategy;
  InitDiagnostics diagnostics;
};

/// Theta rows from physical curves; W = max(0, T * pinv(Theta)).
InitResult knowledge_init(const Matrix& t, const TimeGrid& grid,
                          std::span<const ComponentSpec> specs);

/// NNDSVD: leading k singular triplets, each replaced by the dominant
/// rank-one term of the positive section of sigma_j u_j v_j^T.
InitResult nndsvd_init(const Matrix& t, std::size_t k);

/// Positive and negative sections of one singular pair, as used by NNDSVD.
struct SectionTriplet {
  double sigma;
  std::vector<double> u_pos, u_neg, v_pos, v_neg;
  double mu_pos() const;
  double mu_neg() const;
};

/// The k leading singular triplets of t split into sections.
std::vector<SectionTriplet> nndsvd_sections(const Matrix& t, std::size_t k);

/// i.i.d. uniform entries on (0, s], s = sqrt(mean(T) / k).
InitResult random_init(const Matrix& t, std::size_t k, std::uint64_t seed);

}  // namespace heatnmf

namespace heatnmf {

/// Dispatches to one of the three strategies. `templates` feeds the
/// knowledge-based strategy (defaults for rank k when empty); `seed` feeds
/// the random one.
InitResult initialize(InitStrategy strategy, const Matrix& t, const TimeGrid& grid, std::size_t k,
                      std::span<const ComponentTemplate> templates, std::uint64_t seed);

}  // namespace heatnmf
