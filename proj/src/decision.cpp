#include "gseq/decision.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "gseq/errors.hpp"

namespace gseq {

DecisionTrace decide(const StatisticPath& path, const BoundarySet& boundaries) {
  if (path.empty()) throw std::invalid_argument("decide: empty statistic path");
  if (path.size() > boundaries.values.size()) {
    throw std::invalid_argument("decide: path has more looks than the boundary set");
  }
  const bool two = (boundaries.sidedness == Sidedness::two_sided);
  DecisionTrace trace;
  trace.method = boundaries.method;
  for (std::size_t j = 0; j < path.size(); ++j) {
    const double c = boundaries.values[j];
    const double v = two ? std::fabs(path[j].s) : path[j].s;
    LookComparison cmp;
    cmp.k = path[j].k;
    cmp.s = path[j].s;
    cmp.c = c;
    cmp.crossed = (v >= c);
    trace.looks.push_back(cmp);
    if (cmp.crossed) {
      trace.stop_stage = path[j].k;
      trace.rejected = true;
      return trace;
    }
  }
  trace.stop_stage = path.back().k;
  trace.rejected = false;
  return trace;
}

namespace {

std::vector<double> analysis_fractions(const TrialData& data, const DesignSpec& spec,
                                       const StatisticPath& path) {
  const int k_avail = data.num_stages();
  if (k_avail > spec.k) {
    throw invalid_data_error("analyze: data has more stages than the design allows");
  }
  if (spec.info_mode == InfoMode::sample_size) {
    // Planned fractions restricted to the looks seen so far.
    const auto all = information_fractions(spec);
    // Observed cumulative sizes must match the plan for planned fractions to
    // apply.
    const auto cm = spec.cumulative_m();
    const auto cn = spec.cumulative_n();
    for (int j = 0; j < k_avail; ++j) {
      if (path[j].m_cum != cm[j] || path[j].n_cum != cn[j]) {
        throw invalid_data_error("analyze: observed stage sizes differ from the plan at look " +
                                 std::to_string(j + 1) +
                                 "; use estimated-information mode for unplanned sizes");
      }
    }
    return {all.begin(), all.begin() + k_avail};
  }
  std::vector<double> info(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) info[j] = path[j].info_hat;
  return information_fractions(spec, info);
}

}  // namespace

InterimResult analyze_interim(const TrialData& data, const DesignSpec& spec,
                              const AnalyzeOptions& options, const InterimState& state) {
  spec.validate();
  data.validate(&spec.gamma);
  const int k_avail = data.num_stages();
  const StatisticPath path = statistic_path(data);
  const bool freeze = (options.mode == BoundaryMode::freeze);
  const int frozen_looks = freeze ? std::min(state.looks(), k_avail) : 0;
  if (freeze && state.looks() > 0) {
    if (static_cast<int>(state.fractions.size()) != state.looks()) {
      throw std::invalid_argument("analyze: carried state has mismatched fractions");
    }
  }

  std::vector<double> fractions = analysis_fractions(data, spec, path);
  // Frozen fractions stay exactly as they were solved at the earlier look.
  for (int j = 0; j < frozen_looks; ++j) fractions[j] = state.fractions[j];

  InterimResult out;
  out.fractions = fractions;
  const std::span<const double> frozen(state.boundary_values.data(),
                                       static_cast<std::size_t>(frozen_looks));

  switch (options.method) {
    case Method::normal: {
      const CovarianceSchedule schedule(fractions);
      out.boundaries =
          normal_boundaries(schedule, *spec.spending, spec.sidedness, {}, frozen);
      break;
    }
    case Method::t_approx: {
      const CovarianceSchedule schedule(fractions);
      // The underlying normal boundaries are re-derived each call; freezing
      // applies to the reported t-scale values below.
      BoundarySet normal =
          normal_boundaries(schedule, *spec.spending, spec.sidedness, {}, {});
      std::vector<double> dfs(path.size());
      for (std::size_t j = 0; j < path.size(); ++j) dfs[j] = welch_df(path[j]);
      BoundarySet t_bounds = t_approx_boundaries(normal, dfs);
      for (int j = 0; j < frozen_looks; ++j) {
        t_bounds.values[j] = state.boundary_values[j];
      }
      out.boundaries = t_bounds;
      out.state.dfs = dfs;
      for (int j = 0; j < frozen_looks && j < static_cast<int>(state.dfs.size()); ++j) {
        out.state.dfs[j] = state.dfs[j];
      }
      break;
    }
    case Method::permutation: {
      PermutationOptions popt;
      popt.replicates = options.permutation_replicates;
      popt.seed = options.seed;
      popt.exhaustive_cap = options.exhaustive_cap;
      popt.workers = options.workers;
      if (options.resample_mode) {
        popt.mode = *options.resample_mode;
      } else {
        const std::uint64_t space = assignment_space_size(data, k_avail, options.exhaustive_cap);
        popt.mode = (space <= options.exhaustive_cap) ? ResampleMode::exhaustive
                                                      : ResampleMode::monte_carlo;
      }
      PermutationBoundaryResult pres = permutation_boundaries(
          data, k_avail, *spec.spending, fractions, spec.sidedness, popt, frozen);
      out.boundaries = pres.boundaries;
      out.permutation = std::move(pres);
      break;
    }
  }

  out.trace = decide(path, out.boundaries);
  out.state.fractions = fractions;
  out.state.boundary_values = out.boundaries.values;
  return out;
}

}  // namespace gseq
