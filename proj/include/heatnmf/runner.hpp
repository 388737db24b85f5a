#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatnmf/init.hpp"
#include "heatnmf/nmf.hpp"
#include "heatnmf/synth.hpp"

namespace heatnmf {

/// Files written into one output directory. Unless `commit()` is called,
/// everything written through this object is deleted on destruction, so a
/// failed run leaves no partial results behind.
class OutputFiles {
 public:
  explicit OutputFiles(std::filesystem::path dir);
  OutputFiles(const OutputFiles&) = delete;
  OutputFiles& operator=(const OutputFiles&) = delete;
  ~OutputFiles();

  std::filesystem::path write(const std::string& name, std::string_view content);
  void commit() noexcept { committed_ = true; }
  const std::vector<std::filesystem::path>& files() const noexcept { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  std::size_t k = 0;
  InitStrategy init = InitStrategy::Knowledge;
  std::optional<std::filesystem::path> components;
  std::uint64_t seed = 0;
  std::optional<double> dt;
  SolverConfig solver;
  bool emit_plots = false;
};

struct Report {
  std::vector<std::filesystem::path> files;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t clamped_entries = 0;
  std::size_t revivals = 0;
  std::vector<double> l1_norms;        // Theta row L1 norms before normalisation
  std::vector<std::size_t> zero_rows;
  std::vector<std::string> warnings;
};

Report run_decompose(const RunConfig& config);

struct CompareConfig {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  std::size_t k = 0;
  std::vector<InitStrategy> strategies{InitStrategy::Knowledge, InitStrategy::Nndsvd,
                                       InitStrategy::Random};
  std::size_t seeds = 20;
  std::uint64_t seed = 0;  // random runs use seed, seed+1, ...
  std::optional<std::filesystem::path> components;
  std::optional<double> dt;
  SolverConfig solver;
  bool emit_plots = true;
};

struct StrategyOutcome {
  InitStrategy strategy;
  std::vector<double> costs;  // random: per-iteration median over seeds
  double final_cost = 0.0;
  double iterations_to_1pct = 0.0;  // random: median over seeds
  std::vector<std::size_t> per_seed_iterations;  // random only
};

struct CompareReport {
  std::vector<std::filesystem::path> files;
  std::vector<StrategyOutcome> outcomes;

  const StrategyOutcome* find(InitStrategy s) const;
};

CompareReport run_compare_inits(const CompareConfig& config);

/// 1-based index of the first iteration whose cost is within `rel` of the
/// final cost.
std::size_t iterations_to_within(std::span<const double> costs, double rel = 0.01);

double median(std::vector<double> values);

/// Writes data.csv, truth_w.csv and truth_theta.csv.
std::vector<std::filesystem::path> run_synth(const std::filesystem::path& spec_path,
                                             const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> run_synth(const SyntheticSpec& spec,
                                             const std::filesystem::path& out_dir);

/// Matches w.csv/theta.csv in `recovered_dir` against truth_w.csv and
/// truth_theta.csv in `truth_dir`; writes match.csv into `recovered_dir`.
MatchReport run_score(const std::filesystem::path& recovered_dir, const std::filesystem::path& truth_dir);

}  // namespace heatnmf
