// Test-only oracles, independent of the implementation paths they check:
// a long-double normal CDF, dense linear algebra for small systems, finite
// differences, and refining grid maximizers.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Standard normal CDF through the long-double erfc (64-bit mantissa on
/// x86), a different precision path than the library's double erfc.
inline long double phi(long double x) {
  const long double inv_sqrt2 = 0.70710678118654752440084436210485L;
  return 0.5L * erfcl(-x * inv_sqrt2);
}

/// Dense Gaussian elimination with partial pivoting; n kept small in tests.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (a[piv][col] == 0.0) throw std::runtime_error("dense_solve: singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Saddle-point KKT solve [H e; e^T 0][dw; nu] = [-g; 0] as one dense system.
inline std::pair<std::vector<double>, double> dense_kkt(const std::vector<std::vector<double>>& h,
                                                        const std::vector<double>& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
  std::vector<double> rhs(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = h[i][j];
    a[i][n] = 1.0;
    a[n][i] = 1.0;
    rhs[i] = -g[i];
  }
  auto sol = dense_solve(std::move(a), std::move(rhs));
  std::vector<double> dw(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(n));
  return {dw, sol[n]};
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Maximizes a continuous unimodal-enough f on [lo, hi] by a coarse grid
/// with repeated refinement around the best point.  `points` is the grid
/// size per pass; three passes reach ~(hi-lo)/points^3 resolution.
inline double grid_maximize(const std::function<double(double)>& f, double lo, double hi, int points = 1000,
                            int passes = 3) {
  double best_x = lo, best_f = -1e300;
  double a = lo, b = hi;
  for (int pass = 0; pass < passes; ++pass) {
    const double step = (b - a) / points;
    for (int i = 0; i <= points; ++i) {
      const double x = a + step * i;
      const double v = f(x);
      if (v > best_f) {
        best_f = v;
        best_x = x;
      }
    }
    a = std::max(lo, best_x - 2.0 * step);
    b = std::min(hi, best_x + 2.0 * step);
  }
  return best_x;
}

}  // namespace oracle
