#include "gseq/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gseq/errors.hpp"
#include "gseq/parallel.hpp"

namespace gseq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

// C(n, r) saturating at 2^64 - 1.
std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  using u128 = unsigned __int128;
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    const u128 next = static_cast<u128>(c) * (n - r + i) / i;
    if (next > kSaturated) return kSaturated;
    c = static_cast<std::uint64_t>(next);
  }
  return c;
}

void check_prefix(const TrialData& data, int k) {
  data.validate();
  if (k < 1 || k > data.num_stages()) {
    throw std::invalid_argument("permutation: look count out of range");
  }
}

// Writes the index-th m-subset of {0..n-1} (lexicographic order) into the
// first m slots of perm and the complement into the rest.
void unrank_combination(std::uint64_t index, std::uint32_t n, std::uint32_t m,
                        std::vector<std::uint32_t>& perm) {
  perm.resize(n);
  std::uint32_t next = 0;
  std::uint32_t filled = 0;
  for (std::uint32_t j = 0; j < m; ++j) {
    for (std::uint32_t v = next; v < n; ++v) {
      const std::uint64_t cnt = binomial_saturating(n - 1 - v, m - 1 - j);
      if (index < cnt) {
        perm[filled++] = v;
        next = v + 1;
        break;
      }
      index -= cnt;
    }
  }
  // Complement in ascending order after the chosen set.
  std::vector<bool> chosen(n, false);
  for (std::uint32_t j = 0; j < m; ++j) chosen[perm[j]] = true;
  std::uint32_t pos = m;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (!chosen[v]) perm[pos++] = v;
  }
}

void fisher_yates(std::vector<std::uint32_t>& perm, std::uint32_t n, RngStream& rng) {
  perm.resize(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::uint32_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::uint32_t>(rng.next_below(i + 1));
    std::swap(perm[i], perm[j]);
  }
}

// Ascending order within each block. Accumulation order affects the low bits
// of the statistic, so without this, equal assignment sets drawn in different
// orders would compare unequal against the exhaustive enumeration.
void canonicalize_blocks(std::vector<std::uint32_t>& perm, std::uint32_t m) {
  std::sort(perm.begin(), perm.begin() + m);
  std::sort(perm.begin() + m, perm.end());
}

// Pooled per-stage views plus counts; shared by all replicates.
struct PooledStages {
  std::vector<std::vector<double>> values;  // treatment block then control block
  std::vector<std::uint32_t> m;             // treatment sizes
  std::vector<std::uint32_t> n_total;       // pooled sizes
  std::vector<std::uint64_t> combos;        // C(N_s, m_s), saturating
};

PooledStages pool_stages(const TrialData& data, int k) {
  PooledStages out;
  out.values.resize(k);
  out.m.resize(k);
  out.n_total.resize(k);
  out.combos.resize(k);
  for (int s = 0; s < k; ++s) {
    const auto& blk = data.stages[s];
    out.values[s].reserve(blk.treatment.size() + blk.control.size());
    out.values[s].insert(out.values[s].end(), blk.treatment.begin(), blk.treatment.end());
    out.values[s].insert(out.values[s].end(), blk.control.begin(), blk.control.end());
    out.m[s] = static_cast<std::uint32_t>(blk.treatment.size());
    out.n_total[s] = static_cast<std::uint32_t>(out.values[s].size());
    out.combos[s] = binomial_saturating(out.n_total[s], out.m[s]);
  }
  return out;
}

std::uint64_t joint_space(const PooledStages& pooled, std::uint64_t cap) {
  using u128 = unsigned __int128;
  u128 total = 1;
  for (std::uint64_t c : pooled.combos) {
    total *= c;
    if (total > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(total);
}

// One replicate's path: relabel each stage by its permutation, feed both arms
// through the same cumulative accumulators as the observed path.
void replicate_path(const PooledStages& pooled,
                    const std::vector<std::vector<std::uint32_t>>& perms, std::int64_t b,
                    ReplicatePaths& out) {
  const int K = out.looks;
  ArmAccumulator treated, control;
  const std::size_t base = static_cast<std::size_t>(b) * K;
  bool dead = false;
  for (int s = 0; s < K; ++s) {
    if (!dead) {
      const auto& vals = pooled.values[s];
      const auto& perm = perms[s];
      const std::uint32_t m = pooled.m[s];
      const std::uint32_t n = pooled.n_total[s];
      for (std::uint32_t i = 0; i < m; ++i) treated.add(vals[perm[i]]);
      for (std::uint32_t i = m; i < n; ++i) control.add(vals[perm[i]]);
      LookSummary look;
      if (try_summarize(treated, control, s + 1, &look)) {
        out.s[base + s] = look.s;
        out.var1[base + s] = look.var1_hat;
        out.var2[base + s] = look.var2_hat;
        continue;
      }
      out.degenerate[static_cast<std::size_t>(b)] = 1;
      dead = true;
    }
    out.s[base + s] = kNaN;
    out.var1[base + s] = kNaN;
    out.var2[base + s] = kNaN;
  }
}

void fill_replicate(const PooledStages& pooled, const PermutationOptions& options,
                    std::uint64_t total, std::int64_t b,
                    std::vector<std::vector<std::uint32_t>>& perms, ReplicatePaths& out) {
  const int K = out.looks;
  if (options.mode == ResampleMode::monte_carlo) {
    RngStream rng(stream_key({options.seed, static_cast<std::uint64_t>(b)}));
    for (int s = 0; s < K; ++s) {
      fisher_yates(perms[s], pooled.n_total[s], rng);
      canonicalize_blocks(perms[s], pooled.m[s]);
    }
  } else {
    std::uint64_t index = static_cast<std::uint64_t>(b);
    (void)total;
    for (int s = 0; s < K; ++s) {
      const std::uint64_t radix = pooled.combos[s];
      unrank_combination(index % radix, pooled.n_total[s], pooled.m[s], perms[s]);
      index /= radix;
    }
  }
  replicate_path(pooled, perms, b, out);
}

ReplicatePaths paths_common(const TrialData& data, int k, const PermutationOptions& options,
                            bool parallel) {
  check_prefix(data, k);
  const PooledStages pooled = pool_stages(data, k);

  std::int64_t B;
  std::uint64_t total = 0;
  if (options.mode == ResampleMode::exhaustive) {
    total = joint_space(pooled, options.exhaustive_cap);
    if (total > options.exhaustive_cap) {
      throw size_error("exhaustive permutation space exceeds the cap of " +
                       std::to_string(options.exhaustive_cap) +
                       " assignments; use Monte Carlo mode instead");
    }
    B = static_cast<std::int64_t>(total);
  } else {
    if (options.replicates < 1) {
      throw std::invalid_argument("permutation: replicate count must be positive");
    }
    B = options.replicates;
  }

  ReplicatePaths out;
  out.replicate_count = B;
  out.looks = k;
  const std::size_t cells = static_cast<std::size_t>(B) * k;
  out.s.assign(cells, kNaN);
  out.var1.assign(cells, kNaN);
  out.var2.assign(cells, kNaN);
  out.degenerate.assign(static_cast<std::size_t>(B), 0);

  if (parallel) {
    const int workers = resolve_workers(options.workers);
#ifdef _OPENMP
#pragma omp parallel num_threads(workers)
    {
      std::vector<std::vector<std::uint32_t>> perms(k);
#pragma omp for schedule(static)
      for (std::int64_t b = 0; b < B; ++b) {
        fill_replicate(pooled, options, total, b, perms, out);
      }
    }
#else
    (void)workers;
    std::vector<std::vector<std::uint32_t>> perms(k);
    for (std::int64_t b = 0; b < B; ++b) fill_replicate(pooled, options, total, b, perms, out);
#endif
  } else {
    std::vector<std::vector<std::uint32_t>> perms(k);
    for (std::int64_t b = 0; b < B; ++b) fill_replicate(pooled, options, total, b, perms, out);
  }
  return out;
}

}  // namespace

StageAssignment identity_assignment(const TrialData& data, int k) {
  check_prefix(data, k);
  StageAssignment a;
  a.stages.resize(k);
  for (int s = 0; s < k; ++s) {
    const auto n = static_cast<std::uint32_t>(data.stages[s].treatment.size() +
                                              data.stages[s].control.size());
    a.stages[s].resize(n);
    std::iota(a.stages[s].begin(), a.stages[s].end(), 0);
  }
  return a;
}

StageAssignment sample_assignment(const TrialData& data, int k, RngStream& rng) {
  check_prefix(data, k);
  StageAssignment a;
  a.stages.resize(k);
  for (int s = 0; s < k; ++s) {
    const auto n = static_cast<std::uint32_t>(data.stages[s].treatment.size() +
                                              data.stages[s].control.size());
    fisher_yates(a.stages[s], n, rng);
    canonicalize_blocks(a.stages[s], static_cast<std::uint32_t>(data.stages[s].treatment.size()));
  }
  return a;
}

std::uint64_t assignment_space_size(const TrialData& data, int k, std::uint64_t cap) {
  check_prefix(data, k);
  return joint_space(pool_stages(data, k), cap);
}

std::uint64_t assignment_space_for_sizes(std::span<const std::int64_t> m,
                                         std::span<const std::int64_t> n, std::uint64_t cap) {
  if (m.size() != n.size() || m.empty()) {
    throw std::invalid_argument("assignment space: need matching per-stage sizes");
  }
  using u128 = unsigned __int128;
  u128 total = 1;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (m[s] < 1 || n[s] < 1) {
      throw std::invalid_argument("assignment space: sizes must be positive");
    }
    total *= binomial_saturating(static_cast<std::uint64_t>(m[s] + n[s]),
                                 static_cast<std::uint64_t>(m[s]));
    if (total > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(total);
}

StageAssignment unrank_assignment(const TrialData& data, int k, std::uint64_t index) {
  check_prefix(data, k);
  const PooledStages pooled = pool_stages(data, k);
  StageAssignment a;
  a.stages.resize(k);
  for (int s = 0; s < k; ++s) {
    const std::uint64_t radix = pooled.combos[s];
    unrank_combination(index % radix, pooled.n_total[s], pooled.m[s], a.stages[s]);
    index /= radix;
  }
  return a;
}

std::vector<StageAssignment> enumerate_assignments(const TrialData& data, int k,
                                                   std::uint64_t cap) {
  check_prefix(data, k);
  const PooledStages pooled = pool_stages(data, k);
  const std::uint64_t total = joint_space(pooled, cap);
  if (total > cap) {
    throw size_error("exhaustive permutation space exceeds the cap of " + std::to_string(cap) +
                     " assignments; use Monte Carlo mode instead");
  }
  std::vector<StageAssignment> out;
  out.reserve(total);
  for (std::uint64_t b = 0; b < total; ++b) out.push_back(unrank_assignment(data, k, b));
  return out;
}

TrialData apply_assignment(const TrialData& data, const StageAssignment& a, int k) {
  check_prefix(data, k);
  if (static_cast<int>(a.stages.size()) < k) {
    throw std::invalid_argument("apply_assignment: assignment covers fewer stages than requested");
  }
  const PooledStages pooled = pool_stages(data, k);
  TrialData out;
  out.stages.resize(k);
  for (int s = 0; s < k; ++s) {
    const auto& perm = a.stages[s];
    const auto& vals = pooled.values[s];
    if (perm.size() != vals.size()) {
      throw std::invalid_argument("apply_assignment: stage " + std::to_string(s + 1) +
                                  " permutation has the wrong length");
    }
    const std::uint32_t m = pooled.m[s];
    auto& blk = out.stages[s];
    blk.treatment.reserve(m);
    blk.control.reserve(perm.size() - m);
    for (std::uint32_t i = 0; i < perm.size(); ++i) {
      if (perm[i] >= vals.size()) {
        throw std::invalid_argument("apply_assignment: position index out of range");
      }
      (i < m ? blk.treatment : blk.control).push_back(vals[perm[i]]);
    }
  }
  return out;
}

StatisticPath permuted_path(const TrialData& data, const StageAssignment& a, int k) {
  return statistic_path(apply_assignment(data, a, k), k);
}

ReplicatePaths replicate_paths(const TrialData& data, int k, const PermutationOptions& options) {
  return paths_common(data, k, options, true);
}

ReplicatePaths replicate_paths_serial(const TrialData& data, int k,
                                      const PermutationOptions& options) {
  return paths_common(data, k, options, false);
}

PermutationBoundaryResult solve_permutation_boundaries(const ReplicatePaths& paths,
                                                       std::span<const double> increments,
                                                       Sidedness sidedness,
                                                       std::span<const double> frozen) {
  const int K = paths.looks;
  if (static_cast<int>(increments.size()) != K) {
    throw std::invalid_argument("permutation boundaries: one spend increment per look required");
  }
  if (static_cast<int>(frozen.size()) > K) {
    throw std::invalid_argument("permutation boundaries: more frozen values than looks");
  }
  const std::int64_t B = paths.replicate_count;
  if (B < 1) throw std::invalid_argument("permutation boundaries: no replicates");
  const bool two = (sidedness == Sidedness::two_sided);

  PermutationBoundaryResult out;
  out.boundaries.method = Method::permutation;
  out.boundaries.sidedness = sidedness;
  out.boundaries.values.resize(K);
  out.boundaries.attained_spend.resize(K);
  out.replicate_count = B;
  out.survivors_per_look.resize(K);
  out.crossing_counts.resize(K);
  out.degenerate_replicates =
      std::count(paths.degenerate.begin(), paths.degenerate.end(), std::uint8_t{1});

  std::vector<std::uint8_t> alive(static_cast<std::size_t>(B), 1);
  std::vector<double> pool;
  pool.reserve(static_cast<std::size_t>(B));

  for (int j = 0; j < K; ++j) {
    std::int64_t entering = 0;
    pool.clear();
    for (std::int64_t b = 0; b < B; ++b) {
      if (!alive[static_cast<std::size_t>(b)]) continue;
      ++entering;
      if (paths.degenerate[static_cast<std::size_t>(b)]) continue;
      const double v = paths.stat(b, j);
      if (std::isnan(v)) continue;
      pool.push_back(two ? std::fabs(v) : v);
    }
    out.survivors_per_look[j] = entering;

    double c;
    if (j < static_cast<int>(frozen.size())) {
      c = frozen[j];
    } else {
      const double d = increments[j];
      const auto allowed =
          static_cast<std::int64_t>(std::floor(d * static_cast<double>(B) + 1e-9));
      if (allowed <= 0 || pool.empty()) {
        c = kInf;
      } else {
        std::sort(pool.begin(), pool.end(), std::greater<double>());
        // Walk distinct values from the top; extend while the crossing count
        // stays within the allowance, so ties push the boundary upward.
        c = kInf;
        std::size_t i = 0;
        std::int64_t cum = 0;
        while (i < pool.size()) {
          const double v = pool[i];
          std::size_t e = i;
          while (e < pool.size() && pool[e] == v) ++e;
          cum += static_cast<std::int64_t>(e - i);
          if (cum > allowed) break;
          c = v;
          i = e;
        }
      }
    }

    // Retire crossing replicates; degenerate paths never cross.
    std::int64_t crossed = 0;
    if (!std::isinf(c) || c < 0.0) {
      for (std::int64_t b = 0; b < B; ++b) {
        const std::size_t idx = static_cast<std::size_t>(b);
        if (!alive[idx] || paths.degenerate[idx]) continue;
        const double raw = paths.stat(b, j);
        if (std::isnan(raw)) continue;
        const double v = two ? std::fabs(raw) : raw;
        if (v >= c) {
          alive[idx] = 0;
          ++crossed;
        }
      }
    }
    out.boundaries.values[j] = c;
    out.crossing_counts[j] = crossed;
    out.boundaries.attained_spend[j] =
        static_cast<double>(crossed) / static_cast<double>(B);
  }
  return out;
}

PermutationBoundaryResult permutation_boundaries(const TrialData& data, int k,
                                                 const SpendingFunction& spending,
                                                 std::span<const double> fractions,
                                                 Sidedness sidedness,
                                                 const PermutationOptions& options,
                                                 std::span<const double> frozen) {
  check_prefix(data, k);
  if (static_cast<int>(fractions.size()) != k) {
    throw std::invalid_argument("permutation boundaries: one fraction per analyzed look required");
  }
  // The observed statistic must exist before any resampling makes sense.
  (void)statistic_path(data, k);
  const auto increments = spend_increments(spending, fractions, sidedness);
  const ReplicatePaths paths = replicate_paths(data, k, options);
  PermutationBoundaryResult out =
      solve_permutation_boundaries(paths, increments, sidedness, frozen);
  out.mode = options.mode;
  return out;
}

}  // namespace gseq
