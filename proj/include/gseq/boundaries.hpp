#ifndef GSEQ_BOUNDARIES_HPP
#define GSEQ_BOUNDARIES_HPP

#include <span>
#include <vector>

#include "gseq/design.hpp"

namespace gseq {

enum class Method { normal, t_approx, permutation };

struct BoundarySet {
  Method method = Method::normal;
  Sidedness sidedness = Sidedness::one_sided;
  // Critical value per look; +infinity marks a look that cannot reject.
  // Two-sided boundaries store the positive threshold applied to |S|.
  std::vector<double> values;
  // First-crossing probability actually attained at each look (for
  // permutation boundaries: the empirical resampling spend).
  std::vector<double> attained_spend;

  int looks() const noexcept { return static_cast<int>(values.size()); }
};

// Correlation structure of the standardized statistic across looks:
// corr(S_i, S_j) = sqrt(t_i / t_j) for i <= j.
struct CovarianceSchedule {
  std::vector<double> fractions;

  explicit CovarianceSchedule(std::vector<double> f);
  static CovarianceSchedule from_design(const DesignSpec& spec);

  int looks() const noexcept { return static_cast<int>(fractions.size()); }
  double correlation(int i, int j) const;
};

struct QuadratureOptions {
  int initial_nodes = 256;
  int max_nodes = 4096;
  double boundary_tol = 1e-7;     // node-doubling stop rule on boundary change
  double probability_tol = 1e-8;  // root-finder tolerance on spend
  double tail = 8.0;              // integration clipped to +/- tail
};

struct RecursionDiagnostics {
  // Mass of the continuation (sub-)density after each look; together with the
  // cumulative attained spend this should stay within 1e-6 of 1.
  std::vector<double> survivor_mass;
  int nodes_used = 0;
};

// Normal-theory group sequential boundaries via the independent-increments
// density recursion. Spend increments below 1e-10 yield +infinity at that
// look. `frozen` fixes the boundaries of the first frozen.size() looks (used
// when re-solving later looks at an interim analysis); remaining looks are
// solved against their spend increments.
BoundarySet normal_boundaries(const CovarianceSchedule& schedule, const SpendingFunction& spending,
                              Sidedness sidedness, const QuadratureOptions& options = {},
                              std::span<const double> frozen = {},
                              RecursionDiagnostics* diagnostics = nullptr);

// Same recursion driven by explicit per-look spend increments.
BoundarySet normal_boundaries_from_increments(const CovarianceSchedule& schedule,
                                              std::span<const double> increments,
                                              Sidedness sidedness,
                                              const QuadratureOptions& options = {},
                                              std::span<const double> frozen = {},
                                              RecursionDiagnostics* diagnostics = nullptr);

// Maps normal boundaries through the t-quantile transform
// c~_k = G^{-1}_{df_k}(Phi(c_k)); +infinity passes through unchanged.
BoundarySet t_approx_boundaries(const BoundarySet& normal, std::span<const double> dfs);

// Design-time Welch degrees of freedom under equal variances, from planned
// cumulative sizes.
std::vector<double> planned_welch_dfs(const DesignSpec& spec);

}  // namespace gseq

#endif
