#pragma once

#include <memory>
#include <stdexcept>
#include <string_view>

namespace pweight::roc {

/// Thrown when a derivative is requested at w = 0 or w = cap, where the ROC
/// derivative is only defined as a limit.
struct BoundaryDerivativeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Power of the one-sided Gaussian test at alternative mu as a function of
/// the weight: f(w) = Phi(Phi^{-1}(q w) - mu) on [0, 1/q], extended by
/// continuity to f(0) = 0 and f(1/q) = 1.  Strictly concave for mu < 0.
double roc_value(double w, double mu, double q);

/// f'(w) = q exp(mu z - mu^2/2), z = Phi^{-1}(q w).  Interior w only.
double roc_grad(double w, double mu, double q);

/// f''(w) = q^2 mu sqrt(2 pi) exp(z^2/2 + mu z - mu^2/2).  Interior w only.
/// The exponent is clamped at 700 in log scale; it diverges as w -> 0.
double roc_hess(double w, double mu, double q);

/// Power of the two-sided Gaussian test:
///   g(w, mu) = Phi(Phi^{-1}(q w / 2) - mu) + Phi(Phi^{-1}(q w / 2) + mu),
/// even in mu, defined on [0, two_sided_cap(q)].
double two_sided_power(double w, double mu, double q);

/// Domain cap (1 - 1e-9) / (2q): strong concavity is only guaranteed on
/// levels bounded away from 1.
double two_sided_cap(double q);

/// One-parameter family with monotone likelihood ratio.  The solver needs
/// only the ROC and its first two derivatives; instances that know their
/// density supply pdf/pdf_prime so the chain rule below stays analytic.
class MlrFamily {
 public:
  virtual ~MlrFamily() = default;
  virtual std::string_view name() const = 0;
  virtual double cdf(double theta, double x) const = 0;
  virtual double quantile(double theta, double p) const = 0;
  virtual double pdf(double theta, double x) const = 0;
  virtual double pdf_prime(double theta, double x) const = 0;  // d/dx pdf
};

const MlrFamily& gaussian_location();
const MlrFamily& laplace_location();
const MlrFamily& logistic_location();

/// ROC curve G(x) = F_theta1(F_theta0^{-1}(x)) on x in (0,1).
double general_roc(const MlrFamily& fam, double theta1, double theta0, double x);

/// G'(x) = f_theta1(y) / f_theta0(y), y = F_theta0^{-1}(x).
double general_roc_grad(const MlrFamily& fam, double theta1, double theta0, double x);

/// G''(x) = (f1'(y) f0(y) - f1(y) f0'(y)) / f0(y)^3.
double general_roc_hess(const MlrFamily& fam, double theta1, double theta0, double x);

}  // namespace pweight::roc
