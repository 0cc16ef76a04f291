#include "gseq/simulate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "gseq/errors.hpp"
#include "gseq/parallel.hpp"

namespace gseq {

namespace {
constexpr std::uint64_t kSaltData = 0x64617461;  // outcome draws
constexpr std::uint64_t kSaltPerm = 0x7065726D;  // permutation resampling
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

void ScenarioConfig::validate() const {
  if (id.empty()) throw std::invalid_argument("scenario: id must not be empty");
  if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos) {
    throw std::invalid_argument("scenario '" + id + "': id must not contain commas or newlines");
  }
  design.validate();
  f1.validate();
  f2.validate();
  if (!std::isfinite(mu)) throw std::invalid_argument("scenario '" + id + "': mu must be finite");
  if (methods.empty()) throw std::invalid_argument("scenario '" + id + "': no methods selected");
  if (simulations < 100) {
    throw std::invalid_argument("scenario '" + id + "': need at least 100 simulations");
  }
  bool has_perm = false;
  for (Method m : methods) has_perm = has_perm || (m == Method::permutation);
  if (has_perm && permutation_mode == ResampleMode::monte_carlo && permutation_replicates < 100) {
    throw std::invalid_argument("scenario '" + id +
                                "': need at least 100 permutation replicates");
  }
}

double MethodSummary::reject_rate(std::int64_t r) const {
  return static_cast<double>(reject_count) / static_cast<double>(r);
}

double MethodSummary::mc_standard_error(std::int64_t r) const {
  const double p = reject_rate(r);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(r));
}

double MethodSummary::mean_stop_stage(std::int64_t r) const {
  return static_cast<double>(stop_stage_sum) / static_cast<double>(r);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::normal:
      return "normal";
    case Method::t_approx:
      return "t-approx";
    case Method::permutation:
      return "permutation";
  }
  throw std::logic_error("unreachable method");
}

Method parse_method(const std::string& name) {
  if (name == "normal") return Method::normal;
  if (name == "t-approx") return Method::t_approx;
  if (name == "permutation") return Method::permutation;
  throw std::invalid_argument("unknown method '" + name +
                              "': expected normal, t-approx or permutation");
}

namespace {

struct ScenarioPlan {
  std::vector<double> fractions;          // sample-size mode only
  BoundarySet normal_bounds;              // sample-size mode only
  bool hoisted = false;                   // fractions/bounds precomputed
  bool needs_normal = false;              // normal or t-approx requested
  std::int64_t b_denominator = 0;         // permutation denominator per replicate
};

ScenarioPlan make_plan(const ScenarioConfig& cfg) {
  ScenarioPlan plan;
  for (Method m : cfg.methods) {
    plan.needs_normal = plan.needs_normal || (m == Method::normal) || (m == Method::t_approx);
  }
  if (cfg.design.info_mode == InfoMode::sample_size) {
    plan.fractions = information_fractions(cfg.design);
    if (plan.needs_normal) {
      const CovarianceSchedule schedule(plan.fractions);
      plan.normal_bounds =
          normal_boundaries(schedule, *cfg.design.spending, cfg.design.sidedness);
    }
    plan.hoisted = true;
  }
  for (Method m : cfg.methods) {
    if (m != Method::permutation) continue;
    if (cfg.permutation_mode == ResampleMode::exhaustive) {
      const std::uint64_t cap = 1000000;
      const std::uint64_t space =
          assignment_space_for_sizes(cfg.design.planned_m, cfg.design.planned_n, cap);
      if (space > cap) {
        throw size_error("scenario '" + cfg.id +
                         "': exhaustive permutation space exceeds the cap of " +
                         std::to_string(cap) + " assignments; use Monte Carlo mode instead");
      }
      plan.b_denominator = static_cast<std::int64_t>(space);
    } else {
      plan.b_denominator = cfg.permutation_replicates;
    }
  }
  return plan;
}

TrialData draw_trial(const ScenarioConfig& cfg, std::uint64_t replicate_seed) {
  // Stream keys depend only on (replicate seed, stage, arm), so any replicate
  // can be replayed in isolation and methods never perturb each other.
  TrialData data;
  const int K = cfg.design.k;
  data.stages.resize(static_cast<std::size_t>(K));
  DistSpec shifted = cfg.f1;
  shifted.shift += cfg.mu;
  for (int s = 0; s < K; ++s) {
    auto& blk = data.stages[static_cast<std::size_t>(s)];
    blk.treatment.resize(static_cast<std::size_t>(cfg.design.planned_m[s]));
    blk.control.resize(static_cast<std::size_t>(cfg.design.planned_n[s]));
    RngStream t_rng(stream_key({replicate_seed, kSaltData, static_cast<std::uint64_t>(s), 0}));
    for (auto& x : blk.treatment) x = shifted.draw(t_rng);
    RngStream c_rng(stream_key({replicate_seed, kSaltData, static_cast<std::uint64_t>(s), 1}));
    for (auto& x : blk.control) x = cfg.f2.draw(c_rng);
  }
  return data;
}

// Decision for one replicate and one method; data/path already materialized.
DecisionTrace decide_method(const ScenarioConfig& cfg, const ScenarioPlan& plan, Method method,
                            const TrialData& data, const StatisticPath& path,
                            std::uint64_t replicate_seed) {
  const DesignSpec& spec = cfg.design;
  const int K = spec.k;

  std::vector<double> fractions;
  BoundarySet normal_bounds;
  if (plan.hoisted) {
    fractions = plan.fractions;
    if (plan.needs_normal) normal_bounds = plan.normal_bounds;
  } else {
    std::vector<double> info(path.size());
    for (std::size_t j = 0; j < path.size(); ++j) info[j] = path[j].info_hat;
    fractions = information_fractions(spec, info);
    if (method == Method::normal || method == Method::t_approx) {
      const CovarianceSchedule schedule(fractions);
      normal_bounds = normal_boundaries(schedule, *spec.spending, spec.sidedness);
    }
  }

  switch (method) {
    case Method::normal:
      return decide(path, normal_bounds);
    case Method::t_approx: {
      std::vector<double> dfs(path.size());
      for (std::size_t j = 0; j < path.size(); ++j) dfs[j] = welch_df(path[j]);
      return decide(path, t_approx_boundaries(normal_bounds, dfs));
    }
    case Method::permutation: {
      PermutationOptions popt;
      popt.replicates = cfg.permutation_replicates;
      popt.mode = cfg.permutation_mode;
      popt.workers = 1;  // parallelism lives at the replicate level

      if (cfg.boundary_mode == BoundaryMode::full_recompute) {
        popt.seed = stream_key({replicate_seed, kSaltPerm});
        const PermutationBoundaryResult pres = permutation_boundaries(
            data, K, *spec.spending, fractions, spec.sidedness, popt);
        return decide(path, pres.boundaries);
      }

      // Freeze mode: walk the looks, re-resampling with the data available at
      // each look and keeping earlier boundaries fixed.
      std::vector<double> frozen;
      DecisionTrace trace;
      trace.method = Method::permutation;
      for (int k = 1; k <= K; ++k) {
        popt.seed = stream_key({replicate_seed, kSaltPerm, static_cast<std::uint64_t>(k)});
        const std::span<const double> frac_k(fractions.data(), static_cast<std::size_t>(k));
        const PermutationBoundaryResult pres = permutation_boundaries(
            data, k, *spec.spending, frac_k, spec.sidedness, popt, frozen);
        const double c = pres.boundaries.values[static_cast<std::size_t>(k - 1)];
        const bool two = (spec.sidedness == Sidedness::two_sided);
        const double v = two ? std::fabs(path[k - 1].s) : path[k - 1].s;
        LookComparison cmp;
        cmp.k = k;
        cmp.s = path[k - 1].s;
        cmp.c = c;
        cmp.crossed = (v >= c);
        trace.looks.push_back(cmp);
        if (cmp.crossed) {
          trace.stop_stage = k;
          trace.rejected = true;
          return trace;
        }
        frozen.push_back(c);
      }
      trace.stop_stage = K;
      trace.rejected = false;
      return trace;
    }
  }
  throw std::logic_error("unreachable method");
}

void tally_replicate(const ScenarioConfig& cfg, const ScenarioPlan& plan, std::int64_t r,
                     std::vector<MethodSummary>& local) {
  const int K = cfg.design.k;
  const std::uint64_t replicate_seed = stream_key({cfg.seed, static_cast<std::uint64_t>(r)});
  const TrialData data = draw_trial(cfg, replicate_seed);

  StatisticPath path;
  bool degenerate = false;
  try {
    path = statistic_path(data);
  } catch (const degenerate_data_error&) {
    degenerate = true;
  }

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    MethodSummary& tally = local[mi];
    if (degenerate) {
      // An undefined observed statistic can never reject; the trial runs to
      // its final look.
      ++tally.degenerate_count;
      tally.stop_stage_sum += K;
      continue;
    }
    const DecisionTrace trace =
        decide_method(cfg, plan, cfg.methods[mi], data, path, replicate_seed);
    if (trace.rejected) {
      ++tally.reject_count;
      tally.stop_stage_sum += trace.stop_stage;
      ++tally.first_rejection_at[static_cast<std::size_t>(trace.stop_stage - 1)];
    } else {
      tally.stop_stage_sum += K;
    }
  }
}

OperatingCharacteristics run_common(const ScenarioConfig& cfg, int workers, bool parallel) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  const ScenarioPlan plan = make_plan(cfg);
  const std::int64_t R = cfg.simulations;
  const int K = cfg.design.k;

  std::vector<MethodSummary> totals(cfg.methods.size());
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    totals[mi].method = cfg.methods[mi];
    totals[mi].first_rejection_at.assign(static_cast<std::size_t>(K), 0);
  }

  const auto merge = [&](const std::vector<MethodSummary>& local) {
    for (std::size_t mi = 0; mi < totals.size(); ++mi) {
      totals[mi].reject_count += local[mi].reject_count;
      totals[mi].stop_stage_sum += local[mi].stop_stage_sum;
      totals[mi].degenerate_count += local[mi].degenerate_count;
      for (std::size_t j = 0; j < totals[mi].first_rejection_at.size(); ++j) {
        totals[mi].first_rejection_at[j] += local[mi].first_rejection_at[j];
      }
    }
  };
  const auto fresh_local = [&] {
    std::vector<MethodSummary> local(cfg.methods.size());
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      local[mi].method = cfg.methods[mi];
      local[mi].first_rejection_at.assign(static_cast<std::size_t>(K), 0);
    }
    return local;
  };

  if (parallel) {
    const int w = resolve_workers(workers);
#ifdef _OPENMP
#pragma omp parallel num_threads(w)
    {
      auto local = fresh_local();
#pragma omp for schedule(static)
      for (std::int64_t r = 0; r < R; ++r) tally_replicate(cfg, plan, r, local);
#pragma omp critical
      merge(local);
    }
#else
    (void)w;
    auto local = fresh_local();
    for (std::int64_t r = 0; r < R; ++r) tally_replicate(cfg, plan, r, local);
    merge(local);
#endif
  } else {
    auto local = fresh_local();
    for (std::int64_t r = 0; r < R; ++r) tally_replicate(cfg, plan, r, local);
    merge(local);
  }

  OperatingCharacteristics oc;
  oc.scenario = cfg;
  oc.per_method = std::move(totals);
  oc.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return oc;
}

}  // namespace

OperatingCharacteristics run_scenario(const ScenarioConfig& config, int workers) {
  return run_common(config, workers, true);
}

OperatingCharacteristics run_scenario_serial(const ScenarioConfig& config) {
  return run_common(config, 0, false);
}

std::vector<OperatingCharacteristics> sweep(std::span<const ScenarioConfig> scenarios,
                                            int workers) {
  std::vector<OperatingCharacteristics> out;
  out.reserve(scenarios.size());
  for (const ScenarioConfig& cfg : scenarios) {
    try {
      out.push_back(run_scenario(cfg, workers));
    } catch (const std::exception& e) {
      OperatingCharacteristics oc;
      oc.scenario = cfg;
      oc.error = e.what();
      out.push_back(std::move(oc));
    }
  }
  return out;
}

std::string results_csv_header() {
  return "scenario_id,method,n0,k_stages,gamma,spending,dist1,dist2,mu,r_sims,b_perms,"
         "reject_rate,se,mean_stop_stage,degenerate_count,seconds";
}

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string spending_name(const SpendingFunction& f) {
  switch (f.kind()) {
    case SpendingKind::pocock:
      return "pocock";
    case SpendingKind::obrien_fleming:
      return "obrien-fleming";
    case SpendingKind::custom_table:
      return "custom";
  }
  throw std::logic_error("unreachable spending kind");
}

// Distribution labels such as normal(0,1) contain commas, so those fields are
// quoted per RFC 4180.
std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char ch : raw) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

void append_results_csv(std::string& out, const OperatingCharacteristics& oc,
                        bool include_timing) {
  const ScenarioConfig& cfg = oc.scenario;
  const std::int64_t R = cfg.simulations;
  std::int64_t b_denominator = cfg.permutation_replicates;
  if (cfg.permutation_mode == ResampleMode::exhaustive) {
    const std::uint64_t cap = 1000000;
    try {
      b_denominator = static_cast<std::int64_t>(
          assignment_space_for_sizes(cfg.design.planned_m, cfg.design.planned_n, cap));
    } catch (const std::exception&) {
      b_denominator = 0;
    }
  }
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const Method m = cfg.methods[mi];
    out += csv_field(cfg.id);
    out += ',';
    out += method_name(m);
    out += ',';
    out += std::to_string(cfg.n0);
    out += ',';
    out += std::to_string(cfg.design.k);
    out += ',';
    out += cfg.design.gamma.str();
    out += ',';
    out += spending_name(*cfg.design.spending);
    out += ',';
    out += csv_field(cfg.f1.label());
    out += ',';
    out += csv_field(cfg.f2.label());
    out += ',';
    out += fmt17(cfg.mu);
    out += ',';
    out += std::to_string(R);
    out += ',';
    out += std::to_string(m == Method::permutation ? b_denominator : 0);
    out += ',';
    if (oc.failed()) {
      out += fmt17(kNaN);
      out += ',';
      out += fmt17(kNaN);
      out += ',';
      out += fmt17(kNaN);
      out += ",0,";
    } else {
      const MethodSummary& tally = oc.per_method[mi];
      out += fmt17(tally.reject_rate(R));
      out += ',';
      out += fmt17(tally.mc_standard_error(R));
      out += ',';
      out += fmt17(tally.mean_stop_stage(R));
      out += ',';
      out += std::to_string(tally.degenerate_count);
      out += ',';
    }
    out += include_timing ? fmt17(oc.seconds) : "0";
    out += '\n';
  }
}

}  // namespace gseq
