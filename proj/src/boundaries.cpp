#include "gseq/boundaries.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "gseq/dist.hpp"
#include "gseq/errors.hpp"

namespace gseq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinIncrement = 1e-10;  // below this a look gets no rejection region
}  // namespace

CovarianceSchedule::CovarianceSchedule(std::vector<double> f) : fractions(std::move(f)) {
  if (fractions.empty()) {
    throw std::invalid_argument("covariance schedule: need at least one fraction");
  }
  double prev = 0.0;
  for (double t : fractions) {
    if (!(t > prev) || !(t <= 1.0)) {
      throw std::invalid_argument(
          "covariance schedule: fractions must be strictly increasing within (0, 1]");
    }
    prev = t;
  }
}

CovarianceSchedule CovarianceSchedule::from_design(const DesignSpec& spec) {
  return CovarianceSchedule(information_fractions(spec));
}

double CovarianceSchedule::correlation(int i, int j) const {
  if (i < 0 || j < 0 || i >= looks() || j >= looks()) {
    throw std::invalid_argument("covariance schedule: look index out of range");
  }
  if (i > j) std::swap(i, j);
  return std::sqrt(fractions[i] / fractions[j]);
}

namespace {

// Monotone-decreasing root solve of f(c) = target on [lo, hi], bisection with
// secant acceleration; stops once |f - target| <= ptol.
double solve_decreasing(const std::function<double(double)>& f, double lo, double hi,
                        double flo, double fhi, double target, double ptol) {
  double glo = flo - target;  // >= 0
  double ghi = fhi - target;  // <= 0
  for (int iter = 0; iter < 200; ++iter) {
    double x;
    if (iter % 2 == 0 && glo > ghi) {
      x = lo + (hi - lo) * glo / (glo - ghi);
      const double margin = 1e-3 * (hi - lo);
      x = std::clamp(x, lo + margin, hi - margin);
    } else {
      x = 0.5 * (lo + hi);
    }
    const double g = f(x) - target;
    if (std::fabs(g) <= ptol) return x;
    if (g > 0.0) {
      lo = x;
      glo = g;
    } else {
      hi = x;
      ghi = g;
    }
    if (hi - lo < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

struct ChainResult {
  std::vector<double> boundaries;
  std::vector<double> attained;
  std::vector<double> survivor_mass;
};

struct LookPlan {
  double fraction = 0.0;
  double increment = 0.0;
  bool fixed = false;
  double fixed_value = 0.0;
};

// Runs the full sub-density recursion at a fixed node count.
ChainResult run_chain(const std::vector<LookPlan>& plan, Sidedness sided,
                      const QuadratureOptions& opt, int nodes) {
  const int K = static_cast<int>(plan.size());
  const bool two = (sided == Sidedness::two_sided);
  const double tail = opt.tail;
  const auto& rule = gauss_legendre(nodes);

  ChainResult out;
  out.boundaries.resize(K);
  out.attained.resize(K);
  out.survivor_mass.resize(K);

  std::vector<double> u;   // survivor nodes
  std::vector<double> wg;  // weight * sub-density at the node
  double mass = 1.0;       // survivor mass entering the current look

  for (int k = 0; k < K; ++k) {
    double rho = 0.0, sd = 1.0;
    if (k > 0) {
      rho = std::sqrt(plan[k - 1].fraction / plan[k].fraction);
      sd = std::sqrt(std::max(1.0 - rho * rho, 0.0));
      if (!(sd > 0.0)) {
        throw numerical_error("boundary recursion: consecutive fractions too close");
      }
    }

    // First-crossing probability at this look for candidate boundary c.
    const auto crossing = [&](double c) -> double {
      if (k == 0) {
        const double up = std_normal_sf(c);
        return two ? 2.0 * up : up;
      }
      double acc = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double upper = std_normal_sf((c - rho * u[i]) / sd);
        const double p =
            two ? upper + std_normal_cdf((-c - rho * u[i]) / sd) : upper;
        acc += wg[i] * p;
      }
      return acc;
    };

    double ck;
    if (plan[k].fixed) {
      ck = plan[k].fixed_value;
    } else {
      const double d = plan[k].increment;
      if (d < kMinIncrement) {
        ck = kInf;
      } else if (k == 0) {
        ck = two ? std_normal_quantile(1.0 - d / 2.0) : std_normal_quantile(1.0 - d);
      } else {
        const double at_tail = crossing(tail);
        if (at_tail >= d) {
          ck = tail;
        } else {
          const double lo = two ? 0.0 : -tail;
          const double at_lo = crossing(lo);
          if (at_lo < d) {
            throw numerical_error("boundary recursion: spend increment exceeds survivor mass");
          }
          ck = solve_decreasing(crossing, lo, tail, at_lo, at_tail, d,
                                opt.probability_tol);
        }
      }
    }
    out.boundaries[k] = ck;
    out.attained[k] = std::isinf(ck) ? 0.0 : crossing(ck);

    if (k + 1 < K) {
      // Rebuild the continuation sub-density on the survivor region.
      const double upper = std::min(ck, tail);
      const double lower = two ? -upper : -tail;
      if (!(upper > lower)) {
        throw numerical_error("boundary recursion: empty continuation region");
      }
      std::vector<double> nu(nodes), nwg(nodes);
      const double half = 0.5 * (upper - lower);
      const double mid = 0.5 * (upper + lower);
      double new_mass = 0.0;
      for (int i = 0; i < nodes; ++i) {
        const double x = mid + half * rule.nodes[i];
        double g;
        if (k == 0) {
          g = std_normal_pdf(x);
        } else {
          double acc = 0.0;
          for (std::size_t j = 0; j < u.size(); ++j) {
            acc += wg[j] * std_normal_pdf((x - rho * u[j]) / sd);
          }
          g = acc / sd;
        }
        nu[i] = x;
        nwg[i] = half * rule.weights[i] * g;
        new_mass += nwg[i];
      }
      u = std::move(nu);
      wg = std::move(nwg);
      mass = new_mass;
      out.survivor_mass[k] = mass;
    } else {
      out.survivor_mass[k] = mass - out.attained[k];
    }
  }
  return out;
}

double chain_difference(const ChainResult& a, const ChainResult& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.boundaries.size(); ++i) {
    const double x = a.boundaries[i];
    const double y = b.boundaries[i];
    if (std::isinf(x) || std::isinf(y)) {
      if (std::isinf(x) != std::isinf(y)) return kInf;
      continue;
    }
    worst = std::max(worst, std::fabs(x - y));
  }
  return worst;
}

}  // namespace

BoundarySet normal_boundaries_from_increments(const CovarianceSchedule& schedule,
                                              std::span<const double> increments,
                                              Sidedness sidedness,
                                              const QuadratureOptions& options,
                                              std::span<const double> frozen,
                                              RecursionDiagnostics* diagnostics) {
  const int K = schedule.looks();
  if (static_cast<int>(increments.size()) != K) {
    throw std::invalid_argument("normal boundaries: one spend increment per look required");
  }
  if (static_cast<int>(frozen.size()) > K) {
    throw std::invalid_argument("normal boundaries: more frozen values than looks");
  }
  double total = 0.0;
  for (double d : increments) {
    if (!(d >= 0.0)) {
      throw std::invalid_argument("normal boundaries: spend increments must be non-negative");
    }
    total += d;
  }
  if (total >= 1.0) {
    throw std::invalid_argument("normal boundaries: total spend must be below 1");
  }

  std::vector<LookPlan> plan(K);
  for (int k = 0; k < K; ++k) {
    plan[k].fraction = schedule.fractions[k];
    plan[k].increment = increments[k];
    if (k < static_cast<int>(frozen.size())) {
      plan[k].fixed = true;
      plan[k].fixed_value = frozen[k];
    }
  }

  int nodes = options.initial_nodes;
  ChainResult prev = run_chain(plan, sidedness, options, nodes);
  ChainResult best = prev;
  int used = nodes;
  bool converged = (K == 1);  // the first look is closed-form
  while (!converged && nodes < options.max_nodes) {
    nodes *= 2;
    ChainResult next = run_chain(plan, sidedness, options, nodes);
    const double diff = chain_difference(prev, next);
    best = next;
    used = nodes;
    prev = std::move(next);
    if (diff < options.boundary_tol) {
      converged = true;
    }
  }
  if (!converged) {
    throw numerical_error("boundary recursion: node doubling failed to converge below " +
                          std::to_string(options.boundary_tol) + " by " +
                          std::to_string(options.max_nodes) + " nodes");
  }

  BoundarySet out;
  out.method = Method::normal;
  out.sidedness = sidedness;
  out.values = best.boundaries;
  out.attained_spend = best.attained;
  if (diagnostics != nullptr) {
    diagnostics->survivor_mass = best.survivor_mass;
    diagnostics->nodes_used = used;
  }
  return out;
}

BoundarySet normal_boundaries(const CovarianceSchedule& schedule, const SpendingFunction& spending,
                              Sidedness sidedness, const QuadratureOptions& options,
                              std::span<const double> frozen,
                              RecursionDiagnostics* diagnostics) {
  const auto increments = spend_increments(spending, schedule.fractions, sidedness);
  return normal_boundaries_from_increments(schedule, increments, sidedness, options, frozen,
                                           diagnostics);
}

BoundarySet t_approx_boundaries(const BoundarySet& normal, std::span<const double> dfs) {
  if (normal.method != Method::normal) {
    throw std::invalid_argument("t_approx_boundaries: input must be normal-theory boundaries");
  }
  if (dfs.size() != normal.values.size()) {
    throw std::invalid_argument("t_approx_boundaries: one df per look required");
  }
  BoundarySet out = normal;
  out.method = Method::t_approx;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (!(dfs[k] > 0.0)) {
      throw std::domain_error("t_approx_boundaries: df must be positive");
    }
    if (!std::isinf(out.values[k])) {
      out.values[k] = student_t_quantile(std_normal_cdf(out.values[k]), dfs[k]);
    }
  }
  return out;
}

std::vector<double> planned_welch_dfs(const DesignSpec& spec) {
  spec.validate();
  const auto cm = spec.cumulative_m();
  const auto cn = spec.cumulative_n();
  std::vector<double> dfs(cm.size());
  for (std::size_t k = 0; k < cm.size(); ++k) {
    const double m = static_cast<double>(cm[k]);
    const double n = static_cast<double>(cn[k]);
    // Equal variances assumed at design time, so sigma^2 cancels.
    const double a = 1.0 / m + 1.0 / n;
    const double b = 1.0 / (m * m * (m - 1.0)) + 1.0 / (n * n * (n - 1.0));
    dfs[k] = a * a / b;
  }
  return dfs;
}

}  // namespace gseq
