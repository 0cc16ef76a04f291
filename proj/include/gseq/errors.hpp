#ifndef GSEQ_ERRORS_HPP
#define GSEQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gseq {

// Malformed or inconsistent input (bad CSV rows, non-contiguous stages,
// allocation-ratio violations, non-increasing information).
class invalid_data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All-constant data: the studentized denominator is zero and the statistic is
// undefined. Carries the sign of the mean difference so callers can decide how
// to score the affected replicate.
class degenerate_data_error : public std::runtime_error {
 public:
  degenerate_data_error(const std::string& what, int sign)
      : std::runtime_error(what), sign_(sign) {}
  int sign() const noexcept { return sign_; }

 private:
  int sign_;
};

// Exhaustive enumeration would exceed the configured cap.
class size_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature or root-finder failure.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gseq

#endif
