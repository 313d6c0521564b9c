#include "pweight/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pweight {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Acklam's rational approximation to the normal quantile, |rel err| < 1.15e-9
// before refinement.  Coefficients as published.
constexpr double kA[6] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                          1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[5] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                          6.680131188771972e+01, -1.328068155288572e+01};
constexpr double kC[6] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                          -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[4] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                          3.754408661907416e+00};

double acklam_estimate(double p) {
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double r = std::sqrt(-2.0 * std::log(p));
    return (((((kC[0] * r + kC[1]) * r + kC[2]) * r + kC[3]) * r + kC[4]) * r + kC[5]) /
           ((((kD[0] * r + kD[1]) * r + kD[2]) * r + kD[3]) * r + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double r = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((kC[0] * r + kC[1]) * r + kC[2]) * r + kC[3]) * r + kC[4]) * r + kC[5]) /
           ((((kD[0] * r + kD[1]) * r + kD[2]) * r + kD[3]) * r + 1.0);
  }
  const double u = p - 0.5;
  const double t = u * u;
  return (((((kA[0] * t + kA[1]) * t + kA[2]) * t + kA[3]) * t + kA[4]) * t + kA[5]) * u /
         (((((kB[0] * t + kB[1]) * t + kB[2]) * t + kB[3]) * t + kB[4]) * t + 1.0);
}

}  // namespace

double std_normal_cdf(double x) {
  // erfc carries the asymptotic tail branch; this keeps relative accuracy for
  // x far below zero where 1 - Phi(-x) would round to garbage.
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("std_normal_quantile: p must lie strictly in (0,1), got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  double x = acklam_estimate(p);
  // Two Halley steps against the CDF; each roughly cubes the error.
  for (int k = 0; k < 2; ++k) {
    const double err = std_normal_cdf(x) - p;
    const double pdf = std_normal_pdf(x);
    if (pdf <= 0.0) break;  // p beyond double tail resolution; estimate stands
    const double u = err / pdf;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

TridiagonalMatrix::TridiagonalMatrix(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup)
    : sub_(std::move(sub)), diag_(std::move(diag)), sup_(std::move(sup)) {
  if (diag_.empty()) throw std::invalid_argument("TridiagonalMatrix: empty diagonal");
  if (sub_.size() != diag_.size() - 1 || sup_.size() != diag_.size() - 1) {
    throw std::invalid_argument("TridiagonalMatrix: band sizes must be diag size - 1");
  }
}

TridiagonalMatrix TridiagonalMatrix::symmetric(std::vector<double> off, std::vector<double> diag) {
  std::vector<double> sup = off;
  return TridiagonalMatrix(std::move(off), std::move(diag), std::move(sup));
}

std::vector<double> TridiagonalMatrix::multiply(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n) throw std::invalid_argument("TridiagonalMatrix::multiply: dimension mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag_[i] * x[i];
    if (i > 0) v += sub_[i - 1] * x[i - 1];
    if (i + 1 < n) v += sup_[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

double TridiagonalMatrix::quadratic_form(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n) throw std::invalid_argument("TridiagonalMatrix::quadratic_form: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += diag_[i] * x[i] * x[i];
  double cross = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) cross += (sub_[i] + sup_[i]) * x[i] * x[i + 1];
  return acc + cross;
}

void solve_tridiagonal(const TridiagonalMatrix& m, std::span<const double> b, std::span<double> x,
                       std::span<double> scratch) {
  const std::size_t n = m.size();
  if (b.size() != n || x.size() != n || scratch.size() != n) {
    throw std::invalid_argument("solve_tridiagonal: dimension mismatch");
  }
  const auto& sub = m.sub();
  const auto& diag = m.diag();
  const auto& sup = m.sup();

  // Forward elimination; scratch holds the modified superdiagonal.
  double pivot = diag[0];
  if (!(pivot > 0.0)) throw DegeneracyError("solve_tridiagonal: nonpositive pivot at row 0");
  scratch[0] = sup.empty() ? 0.0 : sup[0] / pivot;
  x[0] = b[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - sub[i - 1] * scratch[i - 1];
    if (!(pivot > 0.0)) {
      throw DegeneracyError("solve_tridiagonal: nonpositive pivot at row " + std::to_string(i));
    }
    scratch[i] = (i + 1 < n) ? sup[i] / pivot : 0.0;
    x[i] = (b[i] - sub[i - 1] * x[i - 1]) / pivot;
  }
  // Back substitution.
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] -= scratch[i] * x[i + 1];
  }
}

std::vector<double> solve_tridiagonal(const TridiagonalMatrix& m, std::span<const double> b) {
  std::vector<double> x(m.size());
  std::vector<double> scratch(m.size());
  solve_tridiagonal(m, b, x, scratch);
  return x;
}

}  // namespace pweight
