#ifndef GSEQ_DIST_HPP
#define GSEQ_DIST_HPP

#include <vector>

namespace gseq {

double std_normal_pdf(double x) noexcept;

// Phi(x) via the complementary error function; absolute error below 1e-12
// across the support, full relative precision in the lower tail.
double std_normal_cdf(double x) noexcept;

// Upper tail 1 - Phi(x), computed without cancellation.
double std_normal_sf(double x) noexcept;

// Inverse of Phi (Wichura's PPND16). Throws std::domain_error outside (0,1).
double std_normal_quantile(double p);

// Regularized incomplete beta I_x(a,b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_pdf(double x, double df);

// CDF of Student's t with df > 0 (not necessarily integer).
double student_t_cdf(double x, double df);

// Quantile of Student's t: Cornish-Fisher start, Newton polish; absolute error
// below 1e-9 for df >= 1. Throws std::domain_error for p outside (0,1) or
// df <= 0.
double student_t_quantile(double p, double df);

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // positive, summing to 2
};

// Cached Gauss-Legendre rule with n points.
const GaussLegendreRule& gauss_legendre(int n);

}  // namespace gseq

#endif
