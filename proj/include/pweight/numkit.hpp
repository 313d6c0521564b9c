#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pweight {

/// Thrown when a root-finding bracket does not straddle the target value.
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when tridiagonal elimination hits a nonpositive pivot.  For the
/// systems solved here this signals loss of positive definiteness.
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Standard normal CDF.  Accurate in the far lower tail (relative error,
/// not just absolute), which matters because per-test levels go down to
/// q ~ 5e-8 and below.
double std_normal_cdf(double x);

/// Standard normal density.
double std_normal_pdf(double x);

/// Inverse standard normal CDF on (0,1).  Rational initial estimate
/// (Acklam) polished by two Halley steps against std_normal_cdf, so the
/// round trip holds to ~1e-12 relative in probability space.
double std_normal_quantile(double p);

struct BisectResult {
  double x = 0.0;
  int iterations = 0;
};

/// Bisection for f(x) = target with f continuous and strictly decreasing on
/// [lo, hi].  Stops when |f(mid) - target| <= tol or the bracket width falls
/// below tol * max(1, |mid|).  Deterministic; no secant acceleration.
template <class F>
BisectResult bisect_decreasing(F&& f, double lo, double hi, double target, double tol) {
  if (!(lo < hi)) throw BracketError("bisect_decreasing: lo must be < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("bisect_decreasing: tol must be positive");
  const double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo >= target) || !(target >= fhi)) {
    throw BracketError("bisect_decreasing: bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "] does not straddle target (f(lo)=" + std::to_string(flo) +
                       ", f(hi)=" + std::to_string(fhi) + ", target=" + std::to_string(target) + ")");
  }
  BisectResult r;
  double a = lo, b = hi;
  // Width-based bound plus slack; |f - target| may trip earlier.
  const int max_iter = static_cast<int>(std::ceil(std::log2(std::max((hi - lo) / tol, 2.0)))) + 5;
  double mid = 0.5 * (a + b);
  for (; r.iterations < max_iter; ++r.iterations) {
    mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (std::abs(fm - target) <= tol || (b - a) <= tol * std::max(1.0, std::abs(mid))) {
      r.x = mid;
      return r;
    }
    if (fm > target) {
      a = mid;
    } else {
      b = mid;
    }
  }
  r.x = mid;
  return r;
}

/// Tridiagonal matrix in banded storage.  |sub| == |sup| == |diag| - 1.
class TridiagonalMatrix {
 public:
  TridiagonalMatrix(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup);

  /// Builds a symmetric matrix (sub == sup).
  static TridiagonalMatrix symmetric(std::vector<double> off, std::vector<double> diag);

  std::size_t size() const { return diag_.size(); }
  const std::vector<double>& sub() const { return sub_; }
  const std::vector<double>& diag() const { return diag_; }
  const std::vector<double>& sup() const { return sup_; }

  std::vector<double> multiply(std::span<const double> x) const;

  /// x^T M x.
  double quadratic_form(std::span<const double> x) const;

 private:
  std::vector<double> sub_, diag_, sup_;
};

/// Thomas-algorithm solve of M x = b without pivoting, valid for symmetric
/// positive definite M (elimination pivots stay positive).  O(J) time and
/// memory.  Throws DegeneracyError on a nonpositive pivot.
std::vector<double> solve_tridiagonal(const TridiagonalMatrix& m, std::span<const double> b);

/// Workspace variant used in inner loops: `scratch` must have size J, `x`
/// size J.  `x` may alias `b` only if they are the same span.
void solve_tridiagonal(const TridiagonalMatrix& m, std::span<const double> b, std::span<double> x,
                       std::span<double> scratch);

}  // namespace pweight
