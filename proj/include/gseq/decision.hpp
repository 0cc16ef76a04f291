#ifndef GSEQ_DECISION_HPP
#define GSEQ_DECISION_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "gseq/boundaries.hpp"
#include "gseq/permutation.hpp"
#include "gseq/stats.hpp"

namespace gseq {

struct LookComparison {
  int k = 0;
  double s = 0.0;
  double c = 0.0;
  bool crossed = false;
};

struct DecisionTrace {
  Method method = Method::normal;
  // First look whose statistic meets its boundary, else the last analyzed
  // look. `rejected` distinguishes the two cases.
  int stop_stage = 0;
  bool rejected = false;
  std::vector<LookComparison> looks;
};

// Compares a statistic path against boundaries look by look, stopping at the
// first crossing. The boundary may cover more looks than the path (interim
// use) but never fewer.
DecisionTrace decide(const StatisticPath& path, const BoundarySet& boundaries);

enum class BoundaryMode { freeze, full_recompute };

struct AnalyzeOptions {
  Method method = Method::normal;
  BoundaryMode mode = BoundaryMode::freeze;
  std::int64_t permutation_replicates = 10000;
  std::uint64_t seed = 0;
  // auto: exhaustive when the assignment space fits under the cap.
  std::optional<ResampleMode> resample_mode;
  std::uint64_t exhaustive_cap = 1000000;
  int workers = 0;
};

// Frozen earlier-look state carried between interim analyses.
struct InterimState {
  std::vector<double> fractions;
  std::vector<double> boundary_values;
  std::vector<double> dfs;  // t-approx only

  int looks() const noexcept { return static_cast<int>(boundary_values.size()); }
};

struct InterimResult {
  DecisionTrace trace;
  BoundarySet boundaries;
  InterimState state;  // through the analyzed look, for the next call
  std::vector<double> fractions;
  std::optional<PermutationBoundaryResult> permutation;
};

// Analyzes the trial data available so far (all stages present) under the
// design. In freeze mode, earlier-look boundaries from `state` are kept and
// only later looks are solved; full-recompute ignores the carried state.
InterimResult analyze_interim(const TrialData& data, const DesignSpec& spec,
                              const AnalyzeOptions& options, const InterimState& state = {});

}  // namespace gseq

#endif
