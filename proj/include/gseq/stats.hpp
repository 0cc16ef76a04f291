#ifndef GSEQ_STATS_HPP
#define GSEQ_STATS_HPP

#include <cstdint>
#include <vector>

#include "gseq/design.hpp"

namespace gseq {

// One-pass Welford accumulator; M2 is non-negative by construction, so the
// sample variance can never come out negative from rounding.
class ArmAccumulator {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::int64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  // Unbiased sample variance; requires count() >= 2.
  double sample_variance() const noexcept { return m2_ / static_cast<double>(n_ - 1); }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct StageBlock {
  std::vector<double> treatment;
  std::vector<double> control;
};

struct TrialData {
  std::vector<StageBlock> stages;

  int num_stages() const noexcept { return static_cast<int>(stages.size()); }

  // Structural checks: at least one stage, every stage non-empty in both arms,
  // all values finite, both arms cumulatively >= 2 from look 1 on. When a
  // ratio is given, each stage must satisfy it exactly.
  void validate(const Ratio* gamma = nullptr) const;

  // Copy of the first k stages.
  TrialData prefix(int k) const;
};

struct LookSummary {
  int k = 0;  // 1-based look index
  std::int64_t m_cum = 0;
  std::int64_t n_cum = 0;
  double mu1_hat = 0.0;
  double mu2_hat = 0.0;
  double var1_hat = 0.0;
  double var2_hat = 0.0;
  double s = 0.0;         // studentized two-sample statistic
  double info_hat = 0.0;  // 1 / (var1/m + var2/n)
};

using StatisticPath = std::vector<LookSummary>;

// Combines the two cumulative arm accumulators into a look summary. Returns
// false (leaving only counts/means/variances valid) when both variances are
// zero and the statistic is undefined.
bool try_summarize(const ArmAccumulator& treated, const ArmAccumulator& control, int look,
                   LookSummary* out) noexcept;

// Summary at look k (1-based) over the pooled first k stages. Throws
// degenerate_data_error when both variances vanish.
LookSummary look_summary(const TrialData& data, int k);

// Summaries at looks 1..k. statistic_path(data) analyzes every stage present.
StatisticPath statistic_path(const TrialData& data);
StatisticPath statistic_path(const TrialData& data, int k);

// Welch-Satterthwaite degrees of freedom at a look. Throws
// degenerate_data_error when both variances vanish.
double welch_df(const LookSummary& look);

}  // namespace gseq

#endif
