#include "gseq/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gseq/dist.hpp"
#include "gseq/errors.hpp"

namespace gseq {

Ratio Ratio::parse(const std::string& text) {
  const auto bad = [&] {
    return std::invalid_argument("invalid allocation ratio '" + text +
                                 "': expected a positive integer or num/den");
  };
  const auto parse_int = [&](const std::string& s) -> std::int64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw bad();
    try {
      return std::stoll(s);
    } catch (const std::exception&) {
      throw bad();
    }
  };
  Ratio r;
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    r.num = parse_int(text);
    r.den = 1;
  } else {
    r.num = parse_int(text.substr(0, slash));
    r.den = parse_int(text.substr(slash + 1));
  }
  if (r.num <= 0 || r.den <= 0) throw bad();
  const std::int64_t g = std::gcd(r.num, r.den);
  r.num /= g;
  r.den /= g;
  return r;
}

std::string Ratio::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

SpendingFunction::SpendingFunction(SpendingKind kind, double alpha,
                                   std::vector<std::pair<double, double>> table)
    : kind_(kind), alpha_(alpha), table_(std::move(table)) {
  if (!(alpha_ > 0.0) || !(alpha_ < 1.0)) {
    throw std::invalid_argument("spending function: alpha must lie in (0,1)");
  }
}

SpendingFunction SpendingFunction::pocock(double alpha) {
  return SpendingFunction(SpendingKind::pocock, alpha, {});
}

SpendingFunction SpendingFunction::obrien_fleming(double alpha) {
  return SpendingFunction(SpendingKind::obrien_fleming, alpha, {});
}

SpendingFunction SpendingFunction::custom(double alpha,
                                          std::vector<std::pair<double, double>> table) {
  if (table.size() < 2) {
    throw std::invalid_argument("custom spending table needs at least two knots");
  }
  if (table.front().first != 0.0 || table.front().second != 0.0) {
    throw std::invalid_argument("custom spending table must start at (0, 0)");
  }
  if (table.back().first != 1.0 || std::fabs(table.back().second - alpha) > 1e-12) {
    throw std::invalid_argument("custom spending table must end at (1, alpha)");
  }
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (!(table[i].first > table[i - 1].first)) {
      throw std::invalid_argument("custom spending table fractions must increase");
    }
    if (table[i].second < table[i - 1].second) {
      throw std::invalid_argument("custom spending table spend must be non-decreasing");
    }
  }
  table.back().second = alpha;
  return SpendingFunction(SpendingKind::custom_table, alpha, std::move(table));
}

double SpendingFunction::at(double t, Sidedness sidedness) const {
  if (!(t >= 0.0) || !(t <= 1.0)) {
    throw std::domain_error("spending function: fraction must lie in [0,1]");
  }
  if (t == 0.0) return 0.0;
  if (t == 1.0) return alpha_;
  switch (kind_) {
    case SpendingKind::pocock:
      return std::min(alpha_ * std::log1p((M_E - 1.0) * t), alpha_);
    case SpendingKind::obrien_fleming: {
      // One-sided: 2 - 2*Phi(q/sqrt(t)) with q = Phi^{-1}(1 - alpha/2),
      // written through erfc so the deep early-look tail keeps relative
      // precision. Two-sided uses alpha/4 and twice the tail mass.
      if (sidedness == Sidedness::one_sided) {
        const double q = std_normal_quantile(1.0 - alpha_ / 2.0);
        return std::min(std::erfc(q / std::sqrt(2.0 * t)), alpha_);
      }
      const double q = std_normal_quantile(1.0 - alpha_ / 4.0);
      return std::min(2.0 * std::erfc(q / std::sqrt(2.0 * t)), alpha_);
    }
    case SpendingKind::custom_table: {
      auto it = std::upper_bound(table_.begin(), table_.end(), t,
                                 [](double v, const std::pair<double, double>& knot) {
                                   return v < knot.first;
                                 });
      // t in (0,1) strictly inside the knot range, so both neighbours exist.
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (t - lo.first) / (hi.first - lo.first);
      return lo.second + w * (hi.second - lo.second);
    }
  }
  throw std::logic_error("unreachable spending kind");
}

std::vector<std::int64_t> DesignSpec::cumulative_m() const {
  std::vector<std::int64_t> out(planned_m.size());
  std::partial_sum(planned_m.begin(), planned_m.end(), out.begin());
  return out;
}

std::vector<std::int64_t> DesignSpec::cumulative_n() const {
  std::vector<std::int64_t> out(planned_n.size());
  std::partial_sum(planned_n.begin(), planned_n.end(), out.begin());
  return out;
}

void DesignSpec::validate() const {
  if (k < 1) throw std::invalid_argument("design: k must be at least 1");
  if (!(alpha > 0.0) || !(alpha <= 0.5)) {
    throw std::invalid_argument("design: alpha must lie in (0, 0.5]");
  }
  if (gamma.num <= 0 || gamma.den <= 0) {
    throw std::invalid_argument("design: allocation ratio must be positive");
  }
  if (!spending) throw std::invalid_argument("design: spending function missing");
  if (std::fabs(spending->alpha() - alpha) > 1e-12) {
    throw std::invalid_argument("design: spending alpha does not match design alpha");
  }
  if (planned_m.size() != static_cast<std::size_t>(k) ||
      planned_n.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("design: planned_m/planned_n must have one entry per stage");
  }
  for (int j = 0; j < k; ++j) {
    if (planned_m[j] < 1 || planned_n[j] < 1) {
      throw std::invalid_argument("design: stage sample sizes must be positive");
    }
    // m_k : n_k must equal gamma exactly, as integers.
    if (planned_m[j] * gamma.den != planned_n[j] * gamma.num) {
      throw std::invalid_argument("design: stage " + std::to_string(j + 1) +
                                  " sizes violate the allocation ratio " + gamma.str());
    }
  }
  const auto cm = cumulative_m();
  const auto cn = cumulative_n();
  if (cm.front() < 2 || cn.front() < 2) {
    throw std::invalid_argument("design: each arm needs at least two observations by look 1");
  }
  if (info_mode == InfoMode::estimated_information) {
    if (i_max && !(*i_max > 0.0)) {
      throw std::invalid_argument("design: i_max must be positive");
    }
  }
}

DesignSpec DesignSpec::balanced(int k, Ratio gamma, double alpha, Sidedness sidedness,
                                SpendingFunction spending, std::int64_t n0) {
  DesignSpec spec;
  spec.k = k;
  spec.gamma = gamma;
  spec.alpha = alpha;
  spec.sidedness = sidedness;
  spec.spending = std::move(spending);
  if (n0 < 1) throw std::invalid_argument("design: n0 must be positive");
  if ((gamma.num * n0) % gamma.den != 0) {
    throw std::invalid_argument("design: gamma * n0 must be an integer treatment size");
  }
  spec.planned_n.assign(k, n0);
  spec.planned_m.assign(k, gamma.num * n0 / gamma.den);
  spec.validate();
  return spec;
}

std::vector<double> information_fractions(const DesignSpec& spec,
                                          std::span<const double> estimated_info,
                                          std::optional<double> i_max_override) {
  spec.validate();
  if (spec.info_mode == InfoMode::sample_size) {
    const auto cn = spec.cumulative_n();
    std::vector<double> out(cn.size());
    for (std::size_t j = 0; j < cn.size(); ++j) {
      out[j] = static_cast<double>(cn[j]) / static_cast<double>(cn.back());
    }
    out.back() = 1.0;
    return out;
  }

  if (estimated_info.empty()) {
    throw std::invalid_argument("information_fractions: estimated mode needs observed information");
  }
  if (estimated_info.size() > static_cast<std::size_t>(spec.k)) {
    throw std::invalid_argument("information_fractions: more looks than the design allows");
  }
  const std::optional<double> imax = i_max_override ? i_max_override : spec.i_max;
  if (!imax || !(*imax > 0.0)) {
    throw std::invalid_argument("information_fractions: estimated mode needs a positive i_max");
  }
  std::vector<double> out(estimated_info.size());
  for (std::size_t j = 0; j < estimated_info.size(); ++j) {
    if (!(estimated_info[j] > 0.0)) {
      throw invalid_data_error("information_fractions: observed information must be positive");
    }
    if (j > 0 && !(estimated_info[j] > estimated_info[j - 1])) {
      throw invalid_data_error("information_fractions: observed information must increase");
    }
    out[j] = std::min(estimated_info[j] / *imax, 1.0);
    const bool final_look = (j + 1 == static_cast<std::size_t>(spec.k));
    if (final_look) {
      out[j] = 1.0;
    } else if (out[j] >= 1.0) {
      throw invalid_data_error(
          "information_fractions: information reached i_max before the final look");
    }
    if (j > 0 && !(out[j] > out[j - 1])) {
      throw invalid_data_error("information_fractions: fractions must be strictly increasing");
    }
  }
  return out;
}

std::vector<double> spend_increments(const SpendingFunction& f, std::span<const double> fractions,
                                     Sidedness sidedness) {
  if (fractions.empty()) {
    throw std::invalid_argument("spend_increments: need at least one fraction");
  }
  std::vector<double> out(fractions.size());
  double prev_t = 0.0;
  double prev_f = 0.0;
  for (std::size_t j = 0; j < fractions.size(); ++j) {
    if (!(fractions[j] > prev_t) || !(fractions[j] <= 1.0)) {
      throw std::invalid_argument("spend_increments: fractions must increase within (0, 1]");
    }
    const double cum = f.at(fractions[j], sidedness);
    out[j] = std::max(cum - prev_f, 0.0);
    prev_t = fractions[j];
    prev_f = cum;
  }
  return out;
}

}  // namespace gseq
