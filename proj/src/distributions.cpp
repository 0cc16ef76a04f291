#include "gseq/distributions.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gseq/dist.hpp"

namespace gseq {

DistSpec DistSpec::normal(double mean, double var) {
  DistSpec d;
  d.kind = DistKind::normal;
  d.mean_param = mean;
  d.var_param = var;
  d.validate();
  return d;
}

DistSpec DistSpec::student_t(double nu) {
  DistSpec d;
  d.kind = DistKind::student_t;
  d.nu = nu;
  d.validate();
  return d;
}

DistSpec DistSpec::exponential() {
  DistSpec d;
  d.kind = DistKind::exponential;
  return d;
}

DistSpec DistSpec::laplace() {
  DistSpec d;
  d.kind = DistKind::laplace;
  return d;
}

DistSpec DistSpec::lognormal() {
  DistSpec d;
  d.kind = DistKind::lognormal;
  return d;
}

void DistSpec::validate() const {
  if (!std::isfinite(shift)) throw std::invalid_argument("distribution: shift must be finite");
  switch (kind) {
    case DistKind::normal:
      if (!std::isfinite(mean_param) || !(var_param > 0.0)) {
        throw std::invalid_argument("distribution: normal needs finite mean and positive variance");
      }
      break;
    case DistKind::student_t:
      // Integer nu so the chi-square denominator is an exact sum of squares;
      // nu >= 3 keeps the variance finite.
      if (!(nu >= 3.0) || nu != std::floor(nu)) {
        throw std::invalid_argument("distribution: t needs an integer nu >= 3");
      }
      break;
    default:
      break;
  }
}

double DistSpec::mean() const {
  switch (kind) {
    case DistKind::normal:
      return mean_param + shift;
    case DistKind::student_t:
      return shift;
    case DistKind::exponential:
      return 1.0 + shift;
    case DistKind::laplace:
      return shift;
    case DistKind::lognormal:
      return std::exp(0.5) + shift;
  }
  throw std::logic_error("unreachable distribution kind");
}

double DistSpec::variance() const {
  switch (kind) {
    case DistKind::normal:
      return var_param;
    case DistKind::student_t:
      return nu / (nu - 2.0);
    case DistKind::exponential:
      return 1.0;
    case DistKind::laplace:
      return 2.0;
    case DistKind::lognormal:
      return (std::exp(1.0) - 1.0) * std::exp(1.0);
  }
  throw std::logic_error("unreachable distribution kind");
}

double draw_standard_normal(RngStream& rng) {
  return std_normal_quantile(rng.next_open());
}

double DistSpec::draw(RngStream& rng) const {
  switch (kind) {
    case DistKind::normal:
      return mean_param + std::sqrt(var_param) * draw_standard_normal(rng) + shift;
    case DistKind::student_t: {
      const double z = draw_standard_normal(rng);
      double chisq = 0.0;
      const int n = static_cast<int>(nu);
      for (int i = 0; i < n; ++i) {
        const double w = draw_standard_normal(rng);
        chisq += w * w;
      }
      return z / std::sqrt(chisq / nu) + shift;
    }
    case DistKind::exponential:
      return -std::log1p(-rng.next_open()) + shift;
    case DistKind::laplace: {
      const double u = rng.next_open();
      return (u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u))) + shift;
    }
    case DistKind::lognormal:
      return std::exp(draw_standard_normal(rng)) + shift;
  }
  throw std::logic_error("unreachable distribution kind");
}

std::string DistSpec::label() const {
  char buf[96];
  std::string base;
  switch (kind) {
    case DistKind::normal:
      std::snprintf(buf, sizeof(buf), "normal(%g,%g)", mean_param, var_param);
      base = buf;
      break;
    case DistKind::student_t:
      std::snprintf(buf, sizeof(buf), "t(%g)", nu);
      base = buf;
      break;
    case DistKind::exponential:
      base = "exp";
      break;
    case DistKind::laplace:
      base = "laplace";
      break;
    case DistKind::lognormal:
      base = "lognormal";
      break;
  }
  if (shift != 0.0) {
    std::snprintf(buf, sizeof(buf), "%+g", shift);
    base += buf;
  }
  return base;
}

double mixture_variance(const DistSpec& f1, const DistSpec& f2, const Ratio& gamma) {
  const double w1 = static_cast<double>(gamma.num) / static_cast<double>(gamma.num + gamma.den);
  const double w2 = 1.0 - w1;
  const double second = w1 * (f1.variance() + f1.mean() * f1.mean()) +
                        w2 * (f2.variance() + f2.mean() * f2.mean());
  const double first = w1 * f1.mean() + w2 * f2.mean();
  return second - first * first;
}

}  // namespace gseq
