#include "heatnmf/runner.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "heatnmf/csv.hpp"
#include "heatnmf/error.hpp"
#include "heatnmf/spec_file.hpp"
#include "heatnmf/svg.hpp"

namespace fs = std::filesystem;

namespace heatnmf {

namespace {

void require_paths(const fs::path& input, const fs::path& out) {
  if (input.empty()) throw validation_error("input path is empty");
  if (out.empty()) throw validation_error("output directory is empty");
}

std::vector<ComponentTemplate> templates_for(const std::optional<fs::path>& path) {
  if (!path) return {};
  return load_component_spec(*path);
}

std::string trace_csv(const ConvergenceTrace& trace) {
  std::string out = "iteration,cost\n";
  for (std::size_t i = 0; i < trace.costs.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(trace.costs[i]) + "\n";
  }
  return out;
}

std::vector<double> iota_from(std::size_t n, double start) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i);
  return v;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

}  // namespace

OutputFiles::OutputFiles(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw io_error("cannot create output directory '" + dir_.string() + "'");
  }
}

OutputFiles::~OutputFiles() {
  if (committed_) return;
  for (const auto& f : files_) {
    std::error_code ec;
    fs::remove(f, ec);
  }
}

fs::path OutputFiles::write(const std::string& name, std::string_view content) {
  const fs::path p = dir_ / name;
  files_.push_back(p);
  write_text_file(p, content);
  return p;
}

Report run_decompose(const RunConfig& config) {
  require_paths(config.input, config.out_dir);
  if (config.k < 1) throw validation_error("k must be >= 1");

  const TimeSeriesSet set = ingest_csv(config.input, config.dt);
  const Matrix& t = set.data;
  if (config.k > std::min(t.rows(), t.cols())) {
    throw validation_error("rank k=" + std::to_string(config.k) + " exceeds min(N, M) = " +
                           std::to_string(std::min(t.rows(), t.cols())));
  }
  const auto templates = templates_for(config.components);
  const InitResult init = initialize(config.init, t, set.grid, config.k, templates, config.seed);

  SolverConfig solver = config.solver;
  solver.revive_seed = config.seed;
  const SolveResult result = solve(t, Factorization{init.w_init, init.theta_init}, solver);

  Report report;
  report.initial_cost = result.trace.initial_cost;
  report.final_cost = result.trace.costs.back();
  report.iterations = result.trace.costs.size();
  report.converged = result.converged;
  report.clamped_entries = init.diagnostics.clamped_entries;
  report.revivals = result.trace.revivals.size();
  report.warnings = set.warnings;
  report.warnings.insert(report.warnings.end(), init.diagnostics.warnings.begin(),
                         init.diagnostics.warnings.end());
  if (solver.normalize_output) {
    report.l1_norms = result.l1_norms;
    report.zero_rows = result.zero_rows;
  } else {
    const NormalizeResult n = normalize(result.factors);
    report.l1_norms = n.l1_norms;
    report.zero_rows = n.zero_rows;
  }

  const Factorization& f = result.factors;
  OutputFiles out(config.out_dir);
  out.write("theta.csv", to_csv(f.theta, set.grid.values()));
  out.write("w.csv", to_csv(f.w));
  out.write("trace.csv", trace_csv(result.trace));

  std::ostringstream txt;
  txt << "input: " << config.input.string() << "\n"
      << "shape: " << t.rows() << "x" << t.cols() << "\n"
      << "dt: " << format_double(set.grid.dt()) << "\n"
      << "k: " << config.k << "\n"
      << "init: " << to_string(config.init) << "\n"
      << "seed: " << config.seed << "\n"
      << "normalized: " << (solver.normalize_output ? "yes" : "no") << "\n"
      << "initial_cost: " << format_double(report.initial_cost) << "\n"
      << "final_cost: " << format_double(report.final_cost) << "\n"
      << "iterations: " << report.iterations << "\n"
      << "converged: " << (report.converged ? "yes" : "no") << "\n"
      << "clamped_init_entries: " << report.clamped_entries << "\n"
      << "revived_components: " << report.revivals << "\n"
      << "l1_norms: " << join(report.l1_norms) << "\n"
      << "zero_rows:";
  for (std::size_t r : report.zero_rows) txt << " " << r;
  txt << "\n";
  for (const auto& choice : init.diagnostics.nndsvd) {
    txt << "nndsvd_triplet: sigma=" << format_double(choice.sigma) << " mu_pos=" << format_double(choice.mu_pos)
        << " mu_neg=" << format_double(choice.mu_neg) << " chose=" << (choice.took_positive ? "+" : "-") << "\n";
  }
  for (const auto& w : report.warnings) txt << "warning: " << w << "\n";
  out.write("report.txt", txt.str());

  if (config.emit_plots) {
    std::vector<svg::Series> profiles;
    const std::vector<double> times(set.grid.values().begin(), set.grid.values().end());
    for (std::size_t c = 0; c < f.k(); ++c) {
      auto row = f.theta.row(c);
      profiles.push_back({"theta " + std::to_string(c + 1), times, {row.begin(), row.end()}});
    }
    out.write("theta.svg", svg::line_plot({"Component profiles", "time [s]", "profile", false}, profiles));

    std::vector<svg::Series> weights;
    for (std::size_t c = 0; c < f.k(); ++c) {
      weights.push_back({"w " + std::to_string(c + 1), iota_from(f.w.rows(), 1.0), f.w.col(c)});
    }
    out.write("w.svg", svg::line_plot({"Component weights", "recording", "weight", false}, weights));

    const svg::Series tr{"cost", iota_from(result.trace.costs.size(), 1.0), result.trace.costs};
    out.write("trace.svg", svg::line_plot({"Reconstruction error", "iteration", "cost", true},
                                          std::span<const svg::Series>(&tr, 1)));
  }
  report.files = out.files();
  out.commit();
  return report;
}

std::size_t iterations_to_within(std::span<const double> costs, double rel) {
  if (costs.empty()) return 0;
  const double target = costs.back() * (1.0 + rel);
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (costs[i] <= target) return i + 1;
  }
  return costs.size();
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const StrategyOutcome* CompareReport::find(InitStrategy s) const {
  for (const auto& o : outcomes) {
    if (o.strategy == s) return &o;
  }
  return nullptr;
}

CompareReport run_compare_inits(const CompareConfig& config) {
  require_paths(config.input, config.out_dir);
  if (config.k < 1) throw validation_error("k must be >= 1");
  if (config.strategies.empty()) throw validation_error("no init strategies requested");

  const TimeSeriesSet set = ingest_csv(config.input, config.dt);
  const Matrix& t = set.data;
  if (config.k > std::min(t.rows(), t.cols())) {
    throw validation_error("rank k=" + std::to_string(config.k) + " exceeds min(N, M) = " +
                           std::to_string(std::min(t.rows(), t.cols())));
  }
  const auto templates = templates_for(config.components);

  auto run_one = [&](InitStrategy s, std::uint64_t seed) {
    const InitResult init = initialize(s, t, set.grid, config.k, templates, seed);
    SolverConfig solver = config.solver;
    solver.revive_seed = seed;
    return solve(t, Factorization{init.w_init, init.theta_init}, solver).trace.costs;
  };

  CompareReport report;
  for (InitStrategy s : config.strategies) {
    StrategyOutcome o{s, {}, 0.0, 0.0, {}};
    if (s != InitStrategy::Random) {
      o.costs = run_one(s, config.seed);
      o.iterations_to_1pct = static_cast<double>(iterations_to_within(o.costs));
    } else {
      if (config.seeds < 1) throw validation_error("need at least one random seed");
      std::vector<std::future<std::vector<double>>> jobs;
      for (std::size_t i = 0; i < config.seeds; ++i) {
        jobs.push_back(std::async(std::launch::async, run_one, s, config.seed + i));
      }
      std::vector<std::vector<double>> traces;
      for (auto& j : jobs) traces.push_back(j.get());

      std::size_t longest = 0;
      std::vector<double> counts;
      for (const auto& tr : traces) {
        longest = std::max(longest, tr.size());
        o.per_seed_iterations.push_back(iterations_to_within(tr));
        counts.push_back(static_cast<double>(o.per_seed_iterations.back()));
      }
      o.iterations_to_1pct = median(counts);
      // A stopped run keeps its final cost for the remaining iterations.
      for (std::size_t it = 0; it < longest; ++it) {
        std::vector<double> at;
        for (const auto& tr : traces) at.push_back(it < tr.size() ? tr[it] : tr.back());
        o.costs.push_back(median(at));
      }
    }
    o.final_cost = o.costs.back();
    report.outcomes.push_back(std::move(o));
  }

  std::size_t rows = 0;
  std::string csv = "iteration";
  for (const auto& o : report.outcomes) {
    csv += ",";
    csv += o.strategy == InitStrategy::Random ? "random_median" : to_string(o.strategy);
    rows = std::max(rows, o.costs.size());
  }
  csv += "\n";
  for (std::size_t it = 0; it < rows; ++it) {
    csv += std::to_string(it + 1);
    for (const auto& o : report.outcomes) {
      csv += ",";
      if (it < o.costs.size()) csv += format_double(o.costs[it]);
    }
    csv += "\n";
  }

  std::ostringstream txt;
  txt << "strategy,iterations_to_1pct,final_cost\n";
  for (const auto& o : report.outcomes) {
    txt << (o.strategy == InitStrategy::Random ? "random_median" : to_string(o.strategy)) << ","
        << format_double(o.iterations_to_1pct) << "," << format_double(o.final_cost) << "\n";
  }

  OutputFiles out(config.out_dir);
  out.write("convergence.csv", csv);
  out.write("compare.txt", txt.str());
  if (config.emit_plots) {
    std::vector<svg::Series> series;
    for (const auto& o : report.outcomes) {
      series.push_back({o.strategy == InitStrategy::Random ? "random (median)" : to_string(o.strategy),
                        iota_from(o.costs.size(), 1.0), o.costs});
    }
    out.write("convergence.svg", svg::line_plot({"Convergence by initialization", "iteration", "cost", true}, series));
  }
  report.files = out.files();
  out.commit();
  return report;
}

std::vector<fs::path> run_synth(const fs::path& spec_path, const fs::path& out_dir) {
  return run_synth(load_synthetic_spec(spec_path), out_dir);
}

std::vector<fs::path> run_synth(const SyntheticSpec& spec, const fs::path& out_dir) {
  if (out_dir.empty()) throw validation_error("output directory is empty");
  const GroundTruth g = generate(spec);
  OutputFiles out(out_dir);
  out.write("data.csv", to_csv(g.t_noisy, spec.grid.values()));
  out.write("truth_w.csv", to_csv(g.w_true));
  out.write("truth_theta.csv", to_csv(g.theta_true, spec.grid.values()));
  out.commit();
  return out.files();
}

MatchReport run_score(const fs::path& recovered_dir, const fs::path& truth_dir) {
  const Factorization recovered{read_matrix_csv(recovered_dir / "w.csv"),
                                read_matrix_csv(recovered_dir / "theta.csv")};
  const Factorization truth{read_matrix_csv(truth_dir / "truth_w.csv"),
                            read_matrix_csv(truth_dir / "truth_theta.csv")};
  const MatchReport m = match_components(recovered, truth);

  std::string csv = "recovered,true,cosine,weight_correlation\n";
  for (std::size_t r = 0; r < m.permutation.size(); ++r) {
    const double rho = m.weight_correlations[r];
    csv += std::to_string(r + 1) + "," + std::to_string(m.permutation[r] + 1) + "," + format_double(m.cosines[r]) +
           "," + (std::isnan(rho) ? std::string("nan") : format_double(rho)) + "\n";
  }
  OutputFiles out(recovered_dir);
  out.write("match.csv", csv);
  out.commit();
  return m;
}

}  // namespace heatnmf
