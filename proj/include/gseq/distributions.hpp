#ifndef GSEQ_DISTRIBUTIONS_HPP
#define GSEQ_DISTRIBUTIONS_HPP

#include <string>

#include "gseq/design.hpp"
#include "gseq/rng.hpp"

namespace gseq {

enum class DistKind { normal, student_t, exponential, laplace, lognormal };

// Outcome distribution for one arm. Families beyond the normal are fixed at
// their standard parameterization (unit-rate exponential, unit-scale Laplace,
// standard lognormal); `shift` translates any family.
struct DistSpec {
  DistKind kind = DistKind::normal;
  double mean_param = 0.0;  // normal only
  double var_param = 1.0;   // normal only
  double nu = 5.0;          // student_t only; integer >= 3
  double shift = 0.0;

  static DistSpec normal(double mean, double var);
  static DistSpec student_t(double nu);
  static DistSpec exponential();
  static DistSpec laplace();
  static DistSpec lognormal();

  void validate() const;
  double mean() const;
  double variance() const;

  // One draw by inverse-transform (t uses a normal/chi-square ratio). The
  // number of uniforms consumed per draw is fixed per family, so streams stay
  // aligned across methods and workers.
  double draw(RngStream& rng) const;

  // Compact label for reports, e.g. "normal(0,1)", "t(5)", "exp+0.3".
  std::string label() const;
};

double draw_standard_normal(RngStream& rng);

// Variance of the null mixture H = w1 F1 + w2 F2 with w1 = gamma/(gamma+1):
// the population being permuted when both arms are pooled.
double mixture_variance(const DistSpec& f1, const DistSpec& f2, const Ratio& gamma);

}  // namespace gseq

#endif
