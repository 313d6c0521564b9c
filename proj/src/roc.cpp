#include "pweight/roc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pweight/numkit.hpp"

namespace pweight::roc {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;
constexpr double kLogClamp = 700.0;

void check_q(double q) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::invalid_argument("q must lie in (0,1), got " + std::to_string(q));
  }
}

void check_weight_range(double w, double cap, const char* fn) {
  // Relative slack absorbs the rounding of cap = 1/q.
  if (!(w >= 0.0) || w > cap * (1.0 + 1e-12)) {
    throw std::invalid_argument(std::string(fn) + ": weight " + std::to_string(w) +
                                " outside [0, " + std::to_string(cap) + "]");
  }
}

}  // namespace

double roc_value(double w, double mu, double q) {
  check_q(q);
  const double cap = 1.0 / q;
  check_weight_range(w, cap, "roc_value");
  if (w == 0.0) return 0.0;
  if (w >= cap) return 1.0;
  const double p = q * w;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return std_normal_cdf(std_normal_quantile(p) - mu);
}

double roc_grad(double w, double mu, double q) {
  check_q(q);
  const double cap = 1.0 / q;
  check_weight_range(w, cap, "roc_grad");
  const double p = q * w;
  if (p <= 0.0 || p >= 1.0) {
    throw BoundaryDerivativeError("roc_grad: derivative undefined at w boundary");
  }
  const double z = std_normal_quantile(p);
  return q * std::exp(std::min(mu * z - 0.5 * mu * mu, kLogClamp));
}

double roc_hess(double w, double mu, double q) {
  check_q(q);
  const double cap = 1.0 / q;
  check_weight_range(w, cap, "roc_hess");
  const double p = q * w;
  if (p <= 0.0 || p >= 1.0) {
    throw BoundaryDerivativeError("roc_hess: derivative undefined at w boundary");
  }
  const double z = std_normal_quantile(p);
  // Single log-scale sum then one exp, clamped: the bare exponent diverges
  // as w -> 0 via the z^2/2 term.
  const double logmag = std::min(0.5 * z * z + mu * z - 0.5 * mu * mu, kLogClamp);
  return q * q * mu * kSqrt2Pi * std::exp(logmag);
}

double two_sided_cap(double q) {
  check_q(q);
  return (1.0 - 1e-9) / (2.0 * q);
}

double two_sided_power(double w, double mu, double q) {
  check_q(q);
  const double cap = two_sided_cap(q);
  check_weight_range(w, cap, "two_sided_power");
  if (w == 0.0) return 0.0;
  const double p = 0.5 * q * w;
  if (p <= 0.0) return 0.0;
  const double z = std_normal_quantile(p);
  return std_normal_cdf(z - mu) + std_normal_cdf(z + mu);
}

namespace {

class GaussianLocation final : public MlrFamily {
 public:
  std::string_view name() const override { return "gaussian"; }
  double cdf(double theta, double x) const override { return std_normal_cdf(x - theta); }
  double quantile(double theta, double p) const override { return theta + std_normal_quantile(p); }
  double pdf(double theta, double x) const override { return std_normal_pdf(x - theta); }
  double pdf_prime(double theta, double x) const override {
    const double u = x - theta;
    return -u * std_normal_pdf(u);
  }
};

class LaplaceLocation final : public MlrFamily {
 public:
  std::string_view name() const override { return "laplace"; }
  double cdf(double theta, double x) const override {
    const double u = x - theta;
    return u < 0.0 ? 0.5 * std::exp(u) : 1.0 - 0.5 * std::exp(-u);
  }
  double quantile(double theta, double p) const override {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("laplace quantile: p outside (0,1)");
    return p < 0.5 ? theta + std::log(2.0 * p) : theta - std::log(2.0 * (1.0 - p));
  }
  double pdf(double theta, double x) const override { return 0.5 * std::exp(-std::abs(x - theta)); }
  double pdf_prime(double theta, double x) const override {
    // Not differentiable at x == theta; the one-sided value suffices a.e.
    const double u = x - theta;
    return (u < 0.0 ? 1.0 : -1.0) * 0.5 * std::exp(-std::abs(u));
  }
};

class LogisticLocation final : public MlrFamily {
 public:
  std::string_view name() const override { return "logistic"; }
  double cdf(double theta, double x) const override { return 1.0 / (1.0 + std::exp(-(x - theta))); }
  double quantile(double theta, double p) const override {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("logistic quantile: p outside (0,1)");
    return theta + std::log(p / (1.0 - p));
  }
  double pdf(double theta, double x) const override {
    const double f = cdf(theta, x);
    return f * (1.0 - f);
  }
  double pdf_prime(double theta, double x) const override {
    const double f = cdf(theta, x);
    return f * (1.0 - f) * (1.0 - 2.0 * f);
  }
};

void check_roc_level(double x) {
  if (!(x > 0.0) || !(x < 1.0)) {
    throw std::invalid_argument("general_roc: level must lie strictly in (0,1), got " + std::to_string(x));
  }
}

}  // namespace

const MlrFamily& gaussian_location() {
  static const GaussianLocation fam;
  return fam;
}

const MlrFamily& laplace_location() {
  static const LaplaceLocation fam;
  return fam;
}

const MlrFamily& logistic_location() {
  static const LogisticLocation fam;
  return fam;
}

double general_roc(const MlrFamily& fam, double theta1, double theta0, double x) {
  check_roc_level(x);
  return fam.cdf(theta1, fam.quantile(theta0, x));
}

double general_roc_grad(const MlrFamily& fam, double theta1, double theta0, double x) {
  check_roc_level(x);
  const double y = fam.quantile(theta0, x);
  return fam.pdf(theta1, y) / fam.pdf(theta0, y);
}

double general_roc_hess(const MlrFamily& fam, double theta1, double theta0, double x) {
  check_roc_level(x);
  const double y = fam.quantile(theta0, x);
  const double f0 = fam.pdf(theta0, y);
  const double f1 = fam.pdf(theta1, y);
  const double d0 = fam.pdf_prime(theta0, y);
  const double d1 = fam.pdf_prime(theta1, y);
  return (d1 * f0 - f1 * d0) / (f0 * f0 * f0);
}

}  // namespace pweight::roc
