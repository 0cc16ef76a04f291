#ifndef GSEQ_PERMUTATION_HPP
#define GSEQ_PERMUTATION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gseq/boundaries.hpp"
#include "gseq/rng.hpp"
#include "gseq/stats.hpp"

namespace gseq {

// Stage-wise relabeling: for each stage a permutation of the pooled positions
// (treatment block first, then control block); the first m_s entries name the
// positions assigned to treatment.
struct StageAssignment {
  std::vector<std::vector<std::uint32_t>> stages;
};

StageAssignment identity_assignment(const TrialData& data, int k);

// Uniformly random stage-wise assignment; consumes the stream stage by stage
// (one Fisher-Yates shuffle per stage). Both blocks are reported in ascending
// order, so an assignment set always maps to the same statistic bit for bit.
StageAssignment sample_assignment(const TrialData& data, int k, RngStream& rng);

// Number of distinct assignments, the product of per-stage binomials; values
// beyond `cap` saturate to cap + 1.
std::uint64_t assignment_space_size(const TrialData& data, int k, std::uint64_t cap);

// Same count from per-stage arm sizes alone.
std::uint64_t assignment_space_for_sizes(std::span<const std::int64_t> m,
                                         std::span<const std::int64_t> n, std::uint64_t cap);

// The index-th assignment in a fixed mixed-radix order (stage 1 varies
// fastest; within a stage, treatment index sets in lexicographic order).
StageAssignment unrank_assignment(const TrialData& data, int k, std::uint64_t index);

// All assignments in unrank order. Throws size_error beyond the cap, with the
// Monte Carlo fallback suggested in the message.
std::vector<StageAssignment> enumerate_assignments(const TrialData& data, int k,
                                                   std::uint64_t cap = 1000000);

// Relabeled copy of the first k stages.
TrialData apply_assignment(const TrialData& data, const StageAssignment& a, int k);

// Statistic path of the relabeled data; the identity assignment reproduces
// statistic_path(data, k) bit for bit.
StatisticPath permuted_path(const TrialData& data, const StageAssignment& a, int k);

enum class ResampleMode { monte_carlo, exhaustive };

struct PermutationOptions {
  std::int64_t replicates = 10000;  // B, Monte Carlo mode only
  ResampleMode mode = ResampleMode::monte_carlo;
  std::uint64_t seed = 0;
  std::uint64_t exhaustive_cap = 1000000;
  int workers = 0;  // 0: all hardware threads
};

// Structure-of-arrays store of per-replicate statistic paths. Entries of
// degenerate replicates (all-constant relabeled data at some look) hold NaN
// from the first degenerate look on.
struct ReplicatePaths {
  std::int64_t replicate_count = 0;
  int looks = 0;
  std::vector<double> s;                 // [b * looks + j]
  std::vector<double> var1, var2;        // cumulative per-arm variances
  std::vector<std::uint8_t> degenerate;  // per replicate

  double stat(std::int64_t b, int j) const { return s[static_cast<std::size_t>(b) * looks + j]; }
};

// Resampled statistic paths for all replicates: Monte Carlo draws keyed by
// (seed, replicate) or the full exhaustive enumeration. OpenMP-parallel over
// replicates; results are identical for every worker count.
ReplicatePaths replicate_paths(const TrialData& data, int k, const PermutationOptions& options);

// Plain-loop reference implementation with identical output.
ReplicatePaths replicate_paths_serial(const TrialData& data, int k,
                                      const PermutationOptions& options);

struct PermutationBoundaryResult {
  BoundarySet boundaries;  // method = permutation
  std::int64_t replicate_count = 0;
  ResampleMode mode = ResampleMode::monte_carlo;
  std::vector<std::int64_t> survivors_per_look;  // replicates entering each look
  std::vector<std::int64_t> crossing_counts;     // replicates at or above the boundary
  std::int64_t degenerate_replicates = 0;
};

// Per-look empirical boundaries from resampled paths. At each look the
// boundary is the largest order statistic of the surviving replicate values
// whose attained crossing fraction (denominator: all B replicates) stays at or
// below the spend increment; ties are resolved upward, so the attained spend
// never exceeds the increment. Frozen prefix values are applied as-is.
// Degenerate replicates never cross but stay in the denominator.
PermutationBoundaryResult solve_permutation_boundaries(const ReplicatePaths& paths,
                                                       std::span<const double> increments,
                                                       Sidedness sidedness,
                                                       std::span<const double> frozen = {});

// End-to-end: resample the first k stages of `data`, then solve the empirical
// boundaries for the spend schedule at `fractions`. Throws
// degenerate_data_error when the observed data itself is degenerate.
PermutationBoundaryResult permutation_boundaries(const TrialData& data, int k,
                                                 const SpendingFunction& spending,
                                                 std::span<const double> fractions,
                                                 Sidedness sidedness,
                                                 const PermutationOptions& options,
                                                 std::span<const double> frozen = {});

}  // namespace gseq

#endif
