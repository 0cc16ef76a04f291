// Command-line front end: boundary computation, look-by-look trial analysis,
// and Monte Carlo operating-characteristic sweeps.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "gseq/boundaries.hpp"
#include "gseq/decision.hpp"
#include "gseq/errors.hpp"
#include "gseq/serialize.hpp"
#include "gseq/simulate.hpp"
#include "gseq/trial_csv.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitValidation = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gseq::invalid_data_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gseq::invalid_data_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw gseq::invalid_data_error("failed writing '" + path + "'");
}

// Machine-parsable one-line error on stderr.
void report_error(const std::string& kind, const std::string& message) {
  std::string msg = message;
  for (auto& ch : msg) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::fprintf(stderr, "gseq: error kind=%s message=\"%s\"\n", kind.c_str(), msg.c_str());
}

struct CommonArgs {
  std::string design_path;
  std::string out_path;
  std::string method = "normal";
};

int run_boundaries(const CommonArgs& args) {
  const gseq::DesignSpec spec = gseq::design_from_json(read_file(args.design_path));
  const gseq::Method method = gseq::parse_method(args.method);
  if (method == gseq::Method::permutation) {
    throw gseq::invalid_data_error(
        "permutation boundaries need trial data; use the analyze command");
  }
  const gseq::CovarianceSchedule schedule = gseq::CovarianceSchedule::from_design(spec);
  gseq::BoundarySet bounds =
      gseq::normal_boundaries(schedule, *spec.spending, spec.sidedness);
  if (method == gseq::Method::t_approx) {
    // No data at design time: Welch df under equal variances at planned sizes.
    bounds = gseq::t_approx_boundaries(bounds, gseq::planned_welch_dfs(spec));
  }
  write_output(args.out_path, gseq::boundary_set_to_json(bounds));
  return kExitOk;
}

struct AnalyzeArgs : CommonArgs {
  std::string data_path;
  std::string mode = "freeze";
  std::string perm_mode = "auto";
  std::int64_t b = 10000;
  std::uint64_t seed = 0;
  std::uint64_t exhaustive_cap = 1000000;
  int workers = 0;
};

int run_analyze(const AnalyzeArgs& args) {
  const gseq::DesignSpec spec = gseq::design_from_json(read_file(args.design_path));
  const gseq::TrialData data = gseq::read_trial_csv_file(args.data_path);

  gseq::AnalyzeOptions options;
  options.method = gseq::parse_method(args.method);
  if (args.mode == "freeze") {
    options.mode = gseq::BoundaryMode::freeze;
  } else if (args.mode == "full") {
    options.mode = gseq::BoundaryMode::full_recompute;
  } else {
    throw gseq::invalid_data_error("--mode must be 'freeze' or 'full', got '" + args.mode + "'");
  }
  if (options.method == gseq::Method::permutation && args.b < 100 &&
      args.perm_mode != "exhaustive") {
    const std::uint64_t space = gseq::assignment_space_size(data, data.num_stages(),
                                                            args.exhaustive_cap);
    if (args.perm_mode == "mc" || space > args.exhaustive_cap) {
      throw gseq::invalid_data_error("--b must be at least 100 for Monte Carlo resampling");
    }
  }
  options.permutation_replicates = args.b;
  options.seed = args.seed;
  options.exhaustive_cap = args.exhaustive_cap;
  options.workers = args.workers;
  if (args.perm_mode == "mc") {
    options.resample_mode = gseq::ResampleMode::monte_carlo;
  } else if (args.perm_mode == "exhaustive") {
    options.resample_mode = gseq::ResampleMode::exhaustive;
  } else if (args.perm_mode != "auto") {
    throw gseq::invalid_data_error("--perm-mode must be 'auto', 'mc' or 'exhaustive', got '" +
                                   args.perm_mode + "'");
  }

  // Freeze mode replays the looks in order so each boundary is solved with
  // exactly the data available at its own look.
  gseq::InterimResult result;
  if (options.mode == gseq::BoundaryMode::freeze) {
    gseq::InterimState state;
    for (int k = 1; k <= data.num_stages(); ++k) {
      result = gseq::analyze_interim(data.prefix(k), spec, options, state);
      state = result.state;
      if (result.trace.rejected) break;
    }
  } else {
    result = gseq::analyze_interim(data, spec, options);
  }
  write_output(args.out_path, gseq::interim_result_to_json(result, options.mode));
  return kExitOk;
}

struct SimulateArgs {
  std::string config_path;
  std::string out_path;
  int workers = 0;
  std::optional<std::uint64_t> seed;
  bool timing = false;
};

int run_simulate(const SimulateArgs& args) {
  std::vector<gseq::ScenarioConfig> scenarios =
      gseq::scenarios_from_json(read_file(args.config_path));
  if (args.seed) {
    for (auto& cfg : scenarios) cfg.seed = *args.seed;
  }
  const auto results = gseq::sweep(scenarios, args.workers);
  std::string csv = gseq::results_csv_header();
  csv += '\n';
  for (const auto& oc : results) {
    gseq::append_results_csv(csv, oc, args.timing);
    if (oc.failed()) {
      report_error("scenario", "scenario '" + oc.scenario.id + "' failed: " + oc.error);
    }
  }
  write_output(args.out_path, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group sequential two-arm tests: normal, t-approximated and "
               "studentized-permutation boundaries"};
  app.require_subcommand(1);

  CommonArgs bargs;
  CLI::App* boundaries = app.add_subcommand(
      "boundaries", "Compute design boundaries from a design JSON file");
  boundaries->add_option("--design", bargs.design_path, "Design JSON file")->required();
  boundaries->add_option("--method", bargs.method, "normal or t-approx (default normal)");
  boundaries->add_option("--out", bargs.out_path, "Output path (default stdout)");

  AnalyzeArgs aargs;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Analyze trial data look by look under a design");
  analyze->add_option("--design", aargs.design_path, "Design JSON file")->required();
  analyze->add_option("--data", aargs.data_path, "Trial CSV file (stage,arm,value)")->required();
  analyze->add_option("--method", aargs.method, "normal, t-approx or permutation")->required();
  analyze->add_option("--b", aargs.b, "Permutation replicates (default 10000)");
  analyze->add_option("--seed", aargs.seed, "Resampling seed (default 0)");
  analyze->add_option("--mode", aargs.mode, "Boundary mode: freeze (default) or full");
  analyze->add_option("--perm-mode", aargs.perm_mode,
                      "Resampling: auto (default), mc or exhaustive");
  analyze->add_option("--exhaustive-cap", aargs.exhaustive_cap,
                      "Max exhaustive assignments (default 1000000)");
  analyze->add_option("--workers", aargs.workers, "Worker threads (default: all)");
  analyze->add_option("--out", aargs.out_path, "Output path (default stdout)");

  SimulateArgs sargs;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run operating-characteristic scenarios to CSV");
  simulate->add_option("--config", sargs.config_path, "Scenario JSON file")->required();
  simulate->add_option("--out", sargs.out_path, "Output CSV path")->required();
  simulate->add_option("--workers", sargs.workers, "Worker threads (default: all)");
  std::uint64_t seed_opt = 0;
  CLI::Option* seed_flag =
      simulate->add_option("--seed", seed_opt, "Override every scenario seed");
  simulate->add_flag("--timing", sargs.timing,
                     "Report wall time in the seconds column (off by default "
                     "so output is byte-reproducible)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (boundaries->parsed()) return run_boundaries(bargs);
    if (analyze->parsed()) return run_analyze(aargs);
    if (simulate->parsed()) {
      if (seed_flag->count() > 0) sargs.seed = seed_opt;
      return run_simulate(sargs);
    }
  } catch (const gseq::numerical_error& e) {
    report_error("numerical", e.what());
    return kExitNumerical;
  } catch (const gseq::degenerate_data_error& e) {
    report_error("degenerate-data", e.what());
    return kExitValidation;
  } catch (const gseq::size_error& e) {
    report_error("size", e.what());
    return kExitValidation;
  } catch (const gseq::invalid_data_error& e) {
    report_error("validation", e.what());
    return kExitValidation;
  } catch (const std::domain_error& e) {
    report_error("validation", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    report_error("validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
