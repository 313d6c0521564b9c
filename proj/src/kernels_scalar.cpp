#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pweight/kernels.hpp"
#include "pweight/numkit.hpp"

namespace pweight::kernels {

namespace {

void s_exp_many(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    if (v < -708.0) {
      out[i] = 0.0;
    } else if (v > 708.0) {
      out[i] = std::numeric_limits<double>::infinity();
    } else {
      out[i] = std::exp(v);
    }
  }
}

void s_norm_cdf_many(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std_normal_cdf(x[i]);
}

double s_spjotvoll_cdf_sum(const double* mu, const double* count, std::size_t n, double c) {
  double acc = 0.0;
  if (count == nullptr) {
    for (std::size_t i = 0; i < n; ++i) acc += std_normal_cdf(0.5 * mu[i] + c / mu[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) acc += count[i] * std_normal_cdf(0.5 * mu[i] + c / mu[i]);
  }
  return acc;
}

void s_spjotvoll_weights(const double* mu, std::size_t n, double c, double inv_q, double* w_out) {
  for (std::size_t i = 0; i < n; ++i) w_out[i] = std_normal_cdf(0.5 * mu[i] + c / mu[i]) * inv_q;
}

void s_barrier_exp_terms(const double* mu, const double* z, std::size_t n, double* df, double* dd) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mu[i];
    const double zi = z[i];
    const double base = std::min(m * zi - 0.5 * m * m, 700.0);
    df[i] = std::exp(base);
    dd[i] = std::exp(std::min(0.5 * zi * zi + base, 700.0));
  }
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double s_sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{
      "scalar", s_exp_many, s_norm_cdf_many, s_spjotvoll_cdf_sum, s_spjotvoll_weights, s_barrier_exp_terms,
      s_dot,    s_sum,
  };
  return backend;
}

}  // namespace pweight::kernels
