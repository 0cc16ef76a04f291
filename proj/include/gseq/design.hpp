#ifndef GSEQ_DESIGN_HPP
#define GSEQ_DESIGN_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gseq {

enum class Sidedness { one_sided, two_sided };

// Exact treatment:control allocation ratio, kept as integers so sample-size
// checks never hit floating-point representation issues.
struct Ratio {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Ratio&) const = default;

  // Accepts "2", "2/1", "1/3". Throws std::invalid_argument on anything else.
  static Ratio parse(const std::string& text);
  std::string str() const;
};

enum class SpendingKind { pocock, obrien_fleming, custom_table };

// Cumulative type-I-error spending schedule f : [0,1] -> [0, alpha].
class SpendingFunction {
 public:
  static SpendingFunction pocock(double alpha);
  static SpendingFunction obrien_fleming(double alpha);
  // Piecewise-linear table of (fraction, cumulative spend) knots; must start
  // at (0,0), end at (1, alpha), and be non-decreasing in both coordinates.
  static SpendingFunction custom(double alpha, std::vector<std::pair<double, double>> table);

  double alpha() const noexcept { return alpha_; }
  SpendingKind kind() const noexcept { return kind_; }
  const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

  // Cumulative spend at information fraction t. Sidedness selects the
  // O'Brien-Fleming-type variant; Pocock-type and custom tables ignore it.
  double at(double t, Sidedness sidedness) const;

 private:
  SpendingFunction(SpendingKind kind, double alpha, std::vector<std::pair<double, double>> table);

  SpendingKind kind_;
  double alpha_;
  std::vector<std::pair<double, double>> table_;
};

inline double spend(const SpendingFunction& f, double t, Sidedness s) { return f.at(t, s); }

enum class InfoMode { sample_size, estimated_information };

struct DesignSpec {
  int k = 1;
  Ratio gamma;
  double alpha = 0.025;
  Sidedness sidedness = Sidedness::one_sided;
  std::optional<SpendingFunction> spending;
  std::vector<std::int64_t> planned_n;  // per-stage control increments
  std::vector<std::int64_t> planned_m;  // per-stage treatment increments
  InfoMode info_mode = InfoMode::sample_size;
  std::optional<double> i_max;

  std::vector<std::int64_t> cumulative_m() const;
  std::vector<std::int64_t> cumulative_n() const;

  // Throws std::invalid_argument when any structural invariant fails.
  void validate() const;

  // Convenience constructor for the common balanced layout: every stage adds
  // n0 controls and gamma*n0 treatments.
  static DesignSpec balanced(int k, Ratio gamma, double alpha, Sidedness sidedness,
                             SpendingFunction spending, std::int64_t n0);
};

// Information fractions for the analyzed looks.
//
// Sample-size mode ignores `estimated_info` and returns the planned fractions
// t_k = n~_k / n~_K for all K looks. Estimated-information mode maps each
// observed information value onto (0, 1] via t_j = min(I_j / I_max, 1); the
// final look is forced to 1. `i_max_override` takes precedence over
// spec.i_max.
std::vector<double> information_fractions(const DesignSpec& spec,
                                          std::span<const double> estimated_info = {},
                                          std::optional<double> i_max_override = std::nullopt);

// Per-look cumulative spend converted to increments d_k = f(t_k) - f(t_{k-1}).
std::vector<double> spend_increments(const SpendingFunction& f, std::span<const double> fractions,
                                     Sidedness sidedness);

}  // namespace gseq

#endif
