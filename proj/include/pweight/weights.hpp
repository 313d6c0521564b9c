#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pweight {

/// Two-sided closed form has no interior solution (would need a weight above
/// its cap): H(q exp(-m)) < J.  Carries the diagnostic values.
struct NoInteriorSolutionError : std::runtime_error {
  double h_at_floor;
  double required;
  NoInteriorSolutionError(const std::string& msg, double h, double j)
      : std::runtime_error(msg), h_at_floor(h), required(j) {}
};

struct EmptySelectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Sided { one, two };

/// Prior standardized effect sizes in caller order.  One-sided construction
/// requires all mu < 0 (nonnegative effects must be excluded upstream; see
/// testing::join_studies).  Two-sided requires all mu != 0.
class EffectSizeVector {
 public:
  static EffectSizeVector one_sided(std::vector<double> mu);
  static EffectSizeVector two_sided(std::vector<double> mu);

  const std::vector<double>& values() const { return mu_; }
  std::size_t size() const { return mu_.size(); }
  Sided sided() const { return sided_; }

  /// Indices of values() sorted by |mu| ascending (stable).
  std::vector<std::size_t> order_abs_ascending() const;

 private:
  EffectSizeVector(std::vector<double> mu, Sided sided);
  std::vector<double> mu_;
  Sided sided_;
};

/// Weights in caller order.  q is NaN for schemes that do not reference a
/// per-test level (exponential, filter); the box cap is only checked when q
/// is finite.
struct WeightVector {
  std::vector<double> w;
  double q = std::numeric_limits<double>::quiet_NaN();
  Sided sided = Sided::one;

  /// Checks sum == J (relative 1e-8), nonnegativity, and the cap 1/q
  /// (one-sided) or 1/(2q) (two-sided) when q is finite.
  void validate() const;
};

struct SpjotvollSolution {
  WeightVector weights;
  double c = 0.0;  // stationarity constant: w_i = Phi(mu_i/2 + c/mu_i)/q
};

struct TwoSidedSolution {
  WeightVector weights;
  double lambda = 0.0;  // dual constant of the two-sided stationarity
  double m = 0.0;       // min_i mu_i^2 / 2
};

struct MonotoneRegimeOneSided {
  bool monotone = false;
  double g_at_m = 0.0;  // G(M) = sum Phi(mu_i/2 + M/mu_i)
  double big_m = 0.0;   // M = max_i mu_i^2 / 2
};

struct MonotoneRegimeTwoSided {
  bool monotone = false;
  double a_star = 0.0;
  double m = 0.0;
  double big_m = 0.0;
};

/// Closed-form one-sided Gaussian weights: w_i = Phi(mu_i/2 + c/mu_i)/q with
/// c chosen by bisection so the weights sum to J.
SpjotvollSolution spjotvoll_one_sided(const EffectSizeVector& mu, double q);

/// Closed-form two-sided Gaussian weights:
///   w(mu; lambda) = 2 Phi(-arccosh(lambda exp(mu^2/2)/q)/|mu|)/q,
/// lambda >= q exp(-m) chosen by bisection on the strictly decreasing sum.
/// Throws NoInteriorSolutionError when the existence condition fails.
TwoSidedSolution spjotvoll_two_sided(const EffectSizeVector& mu, double q);

/// True iff q <= G(M)/J, which certifies that the one-sided Spjotvoll
/// weights are monotone nondecreasing in |mu|.
MonotoneRegimeOneSided monotone_regime_one_sided(const EffectSizeVector& mu, double q);

/// Two-sided analogue: solves log(a) - m = (2a/sqrt(a^2-1) - 1) M for the
/// unique a* > 1 and tests H(q a* exp(-m)) >= J.
MonotoneRegimeTwoSided monotone_regime_two_sided(const EffectSizeVector& mu, double q);

/// w_i proportional to exp(beta |mu_i|), normalized to sum J.  Computed with
/// max subtraction so large beta |mu| cannot overflow.
WeightVector exponential_weights(const EffectSizeVector& mu, double beta);

/// J/K on the K entries with prior_p <= cutoff, zero elsewhere.
WeightVector filter_weights(const std::vector<double>& prior_p, double cutoff);

}  // namespace pweight
