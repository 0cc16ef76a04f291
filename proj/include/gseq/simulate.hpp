#ifndef GSEQ_SIMULATE_HPP
#define GSEQ_SIMULATE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gseq/decision.hpp"
#include "gseq/distributions.hpp"

namespace gseq {

struct ScenarioConfig {
  std::string id;
  DesignSpec design;
  DistSpec f1;  // treatment outcome family
  DistSpec f2;  // control outcome family
  double mu = 0.0;  // additional location shift applied to the treatment arm
  std::int64_t n0 = 0;  // per-stage control increment (echoed in reports)
  std::vector<Method> methods{Method::normal, Method::t_approx, Method::permutation};
  std::int64_t permutation_replicates = 1000;
  ResampleMode permutation_mode = ResampleMode::monte_carlo;
  BoundaryMode boundary_mode = BoundaryMode::full_recompute;
  std::int64_t simulations = 1000;  // R
  std::uint64_t seed = 0;

  void validate() const;
};

struct MethodSummary {
  Method method = Method::normal;
  std::int64_t reject_count = 0;
  std::int64_t stop_stage_sum = 0;
  std::vector<std::int64_t> first_rejection_at;  // per look
  std::int64_t degenerate_count = 0;

  double reject_rate(std::int64_t r) const;
  double mc_standard_error(std::int64_t r) const;
  double mean_stop_stage(std::int64_t r) const;
};

struct OperatingCharacteristics {
  ScenarioConfig scenario;
  std::vector<MethodSummary> per_method;
  double seconds = 0.0;
  std::string error;  // non-empty when the scenario failed

  bool failed() const noexcept { return !error.empty(); }
};

// Simulates R independent trials under the scenario and tallies rejection
// rates, stopping stages and degeneracies per method. Replicates run in
// parallel; all tallies are integer counts merged order-independently, so
// any worker count gives identical results.
OperatingCharacteristics run_scenario(const ScenarioConfig& config, int workers = 0);

// Plain-loop reference implementation with identical output.
OperatingCharacteristics run_scenario_serial(const ScenarioConfig& config);

// Runs every scenario, isolating failures: a failing scenario yields a result
// with `error` set, and the remaining scenarios still run.
std::vector<OperatingCharacteristics> sweep(std::span<const ScenarioConfig> scenarios,
                                            int workers = 0);

std::string method_name(Method m);
Method parse_method(const std::string& name);

// CSV reporting. The header is fixed; one row per (scenario, method). When
// `include_timing` is false the seconds column is written as 0 so repeated
// runs stay byte-identical.
std::string results_csv_header();
void append_results_csv(std::string& out, const OperatingCharacteristics& oc,
                        bool include_timing = false);

}  // namespace gseq

#endif
