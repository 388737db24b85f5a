// heatnmf: decompose sensor time series with HALS NMF.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "heatnmf/csv.hpp"
#include "heatnmf/error.hpp"
#include "heatnmf/runner.hpp"

namespace {

using heatnmf::InitStrategy;

const std::map<std::string, InitStrategy> kStrategies{
    {"random", InitStrategy::Random},
    {"nndsvd", InitStrategy::Nndsvd},
    {"knowledge", InitStrategy::Knowledge},
};

// Inlines `--config FILE` for a subcommand as `--key=value` arguments placed
// before the command line ones, so explicit flags win under take-last.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || (args[0] != "decompose" && args[0] != "compare-inits")) return args;
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw heatnmf::io_error("cannot open config file " + *path);
  std::vector<std::string> inlined;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    if (!item.parents.empty() && item.parents != std::vector<std::string>{"default"}) {
      throw heatnmf::validation_error("config file " + *path + ": sections are not supported");
    }
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    inlined.push_back("--" + item.name + "=" + value);
  }
  args.insert(args.begin() + 1, inlined.begin(), inlined.end());
  return args;
}

std::vector<InitStrategy> parse_strategies(const std::string& list) {
  std::vector<InitStrategy> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    std::string name = list.substr(start, end - start);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto it = kStrategies.find(name);
    if (it == kStrategies.end()) throw heatnmf::validation_error("unknown strategy '" + name + "'");
    out.push_back(it->second);
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-negative decomposition of sensor time series"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  // decompose
  heatnmf::RunConfig run;
  std::string run_input, run_out, run_components;
  std::optional<double> run_dt;
  auto* dec = app.add_subcommand("decompose", "Factorise a dataset into weights and component profiles");
  dec->add_option("--config", config_path, "key = value file; command line flags take precedence");
  dec->add_option("--input", run_input, "dataset CSV")->required();
  dec->add_option("--k", run.k, "number of components")->required();
  dec->add_option("--init", run.init, "initialization strategy")
      ->required()
      ->transform(CLI::CheckedTransformer(kStrategies, CLI::ignore_case));
  dec->add_option("--components", run_components, "component spec file (knowledge init)");
  dec->add_option("--seed", run.seed, "random seed");
  dec->add_option("--tol", run.solver.rel_tol, "relative cost-change stopping threshold");
  dec->add_option("--max-iters", run.solver.max_iters, "iteration cap");
  dec->add_option("--dt", run_dt, "time step in seconds when the CSV has no header");
  dec->add_flag("--normalize", run.solver.normalize_output, "L1-normalise component profiles");
  dec->add_flag("--plots", run.emit_plots, "write SVG plots");
  dec->add_option("--out", run_out, "output directory")->required();

  // synth
  std::string synth_spec, synth_out;
  auto* syn = app.add_subcommand("synth", "Generate a planted synthetic dataset");
  syn->add_option("--spec", synth_spec, "synthetic spec file")->required();
  syn->add_option("--out", synth_out, "output directory")->required();

  // compare-inits
  heatnmf::CompareConfig cmp;
  std::string cmp_input, cmp_out, cmp_components;
  std::optional<double> cmp_dt;
  std::string cmp_strategies;
  auto* com = app.add_subcommand("compare-inits", "Compare convergence of initialization strategies");
  com->add_option("--config", config_path, "key = value file; command line flags take precedence");
  com->add_option("--input", cmp_input, "dataset CSV")->required();
  com->add_option("--k", cmp.k, "number of components")->required();
  com->add_option("--seeds", cmp.seeds, "number of random-init seeds");
  com->add_option("--seed", cmp.seed, "first random seed");
  com->add_option("--strategies", cmp_strategies, "comma-separated subset of knowledge,nndsvd,random");
  com->add_option("--components", cmp_components, "component spec file (knowledge init)");
  com->add_option("--tol", cmp.solver.rel_tol, "relative cost-change stopping threshold");
  com->add_option("--max-iters", cmp.solver.max_iters, "iteration cap");
  com->add_option("--dt", cmp_dt, "time step in seconds when the CSV has no header");
  com->add_option("--out", cmp_out, "output directory")->required();

  // score
  std::string rec_dir, truth_dir;
  auto* sco = app.add_subcommand("score", "Match recovered factors against planted truth");
  sco->add_option("--recovered", rec_dir, "directory with w.csv and theta.csv")->required();
  sco->add_option("--truth", truth_dir, "directory with truth_w.csv and truth_theta.csv")->required();

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const heatnmf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return heatnmf::exit_code(e.kind());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return heatnmf::exit_code(heatnmf::ErrorKind::Validation);
  }

  try {
    if (*dec) {
      run.input = run_input;
      run.out_dir = run_out;
      run.dt = run_dt;
      if (!run_components.empty()) run.components = run_components;
      const heatnmf::Report r = heatnmf::run_decompose(run);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "final cost " << heatnmf::format_double(r.final_cost) << " after " << r.iterations
                << " iterations" << (r.converged ? "" : " (iteration cap reached)") << "\n";
    } else if (*syn) {
      for (const auto& f : heatnmf::run_synth(synth_spec, synth_out)) std::cout << f.string() << "\n";
    } else if (*com) {
      cmp.input = cmp_input;
      cmp.out_dir = cmp_out;
      cmp.dt = cmp_dt;
      if (!cmp_components.empty()) cmp.components = cmp_components;
      if (!cmp_strategies.empty()) cmp.strategies = parse_strategies(cmp_strategies);
      const heatnmf::CompareReport r = heatnmf::run_compare_inits(cmp);
      for (const auto& o : r.outcomes) {
        std::cout << heatnmf::to_string(o.strategy) << ": " << heatnmf::format_double(o.iterations_to_1pct)
                  << " iterations to within 1% of final cost " << heatnmf::format_double(o.final_cost) << "\n";
      }
    } else if (*sco) {
      const heatnmf::MatchReport m = heatnmf::run_score(rec_dir, truth_dir);
      for (std::size_t i = 0; i < m.permutation.size(); ++i) {
        std::cout << "recovered " << i + 1 << " -> true " << m.permutation[i] + 1 << "  cosine "
                  << heatnmf::format_double(m.cosines[i]) << "\n";
      }
    }
  } catch (const heatnmf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return heatnmf::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return heatnmf::exit_code(heatnmf::ErrorKind::Numerical);
  }
  return 0;
}
