#include "gseq/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gseq/errors.hpp"

namespace gseq {

void TrialData::validate(const Ratio* gamma) const {
  if (stages.empty()) throw invalid_data_error("trial data: no stages");
  std::int64_t cm = 0, cn = 0;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto& blk = stages[s];
    if (blk.treatment.empty() || blk.control.empty()) {
      throw invalid_data_error("trial data: stage " + std::to_string(s + 1) +
                               " is missing observations in one arm");
    }
    for (double x : blk.treatment) {
      if (!std::isfinite(x)) {
        throw invalid_data_error("trial data: non-finite treatment value in stage " +
                                 std::to_string(s + 1));
      }
    }
    for (double x : blk.control) {
      if (!std::isfinite(x)) {
        throw invalid_data_error("trial data: non-finite control value in stage " +
                                 std::to_string(s + 1));
      }
    }
    if (gamma != nullptr) {
      const auto m = static_cast<std::int64_t>(blk.treatment.size());
      const auto n = static_cast<std::int64_t>(blk.control.size());
      if (m * gamma->den != n * gamma->num) {
        throw invalid_data_error("trial data: stage " + std::to_string(s + 1) +
                                 " sizes violate the allocation ratio " + gamma->str());
      }
    }
    cm += static_cast<std::int64_t>(blk.treatment.size());
    cn += static_cast<std::int64_t>(blk.control.size());
    if (cm < 2 || cn < 2) {
      throw invalid_data_error("trial data: fewer than two observations per arm at look " +
                               std::to_string(s + 1));
    }
  }
}

TrialData TrialData::prefix(int k) const {
  if (k < 1 || k > num_stages()) {
    throw std::invalid_argument("trial data: prefix length out of range");
  }
  TrialData out;
  out.stages.assign(stages.begin(), stages.begin() + k);
  return out;
}

bool try_summarize(const ArmAccumulator& treated, const ArmAccumulator& control, int look,
                   LookSummary* out) noexcept {
  const double m = static_cast<double>(treated.count());
  const double n = static_cast<double>(control.count());
  out->k = look;
  out->m_cum = treated.count();
  out->n_cum = control.count();
  out->mu1_hat = treated.mean();
  out->mu2_hat = control.mean();
  out->var1_hat = treated.sample_variance();
  out->var2_hat = control.sample_variance();
  const double pooled = (n * out->var1_hat + m * out->var2_hat) / (m + n);
  if (!(pooled > 0.0)) return false;
  out->s = std::sqrt(m * n / (m + n)) * (out->mu1_hat - out->mu2_hat) / std::sqrt(pooled);
  out->info_hat = 1.0 / (out->var1_hat / m + out->var2_hat / n);
  return true;
}

namespace {

[[noreturn]] void throw_degenerate(const LookSummary& look) {
  const double diff = look.mu1_hat - look.mu2_hat;
  const int sign = (diff > 0.0) - (diff < 0.0);
  throw degenerate_data_error("degenerate data at look " + std::to_string(look.k) +
                                  ": both sample variances are zero",
                              sign);
}

}  // namespace

LookSummary look_summary(const TrialData& data, int k) {
  data.validate();
  if (k < 1 || k > data.num_stages()) {
    throw std::invalid_argument("look_summary: look index out of range");
  }
  ArmAccumulator treated, control;
  for (int s = 0; s < k; ++s) {
    for (double x : data.stages[s].treatment) treated.add(x);
    for (double x : data.stages[s].control) control.add(x);
  }
  LookSummary out;
  if (!try_summarize(treated, control, k, &out)) throw_degenerate(out);
  return out;
}

StatisticPath statistic_path(const TrialData& data, int k) {
  data.validate();
  if (k < 1 || k > data.num_stages()) {
    throw std::invalid_argument("statistic_path: look count out of range");
  }
  StatisticPath path;
  path.reserve(static_cast<std::size_t>(k));
  ArmAccumulator treated, control;
  for (int s = 0; s < k; ++s) {
    for (double x : data.stages[s].treatment) treated.add(x);
    for (double x : data.stages[s].control) control.add(x);
    LookSummary look;
    if (!try_summarize(treated, control, s + 1, &look)) throw_degenerate(look);
    path.push_back(look);
  }
  return path;
}

StatisticPath statistic_path(const TrialData& data) {
  return statistic_path(data, data.num_stages());
}

double welch_df(const LookSummary& look) {
  const double m = static_cast<double>(look.m_cum);
  const double n = static_cast<double>(look.n_cum);
  if (look.m_cum < 2 || look.n_cum < 2) {
    throw std::invalid_argument("welch_df: needs at least two observations per arm");
  }
  const double a = look.var1_hat / m;
  const double b = look.var2_hat / n;
  if (!(a + b > 0.0)) throw_degenerate(look);
  const double denom = a * a / (m - 1.0) + b * b / (n - 1.0);
  return (a + b) * (a + b) / denom;
}

}  // namespace gseq
