#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace pweight::kernels {

/// A backend is one implementation of the batch kernels used in the hot
/// loops: the Spjotvoll bisection objective, barrier derivative assembly,
/// and the KKT reductions.  The scalar backend is the reference; vector
/// backends must agree with it within a few ulps (equivalence-tested).
///
/// exp_many saturates outside [-708, 708] (0 below, +inf above); every
/// in-tree caller clamps its log-scale arguments to +-700 first.
struct Backend {
  const char* name;

  void (*exp_many)(const double* x, double* out, std::size_t n);
  void (*norm_cdf_many)(const double* x, double* out, std::size_t n);

  /// sum_i count[i] * Phi(mu[i]/2 + c/mu[i]); `count` may be nullptr (all
  /// ones).  This is G(c) of the one-sided Spjotvoll stationarity condition
  /// evaluated over deduplicated means.
  double (*spjotvoll_cdf_sum)(const double* mu, const double* count, std::size_t n, double c);

  /// w[i] = Phi(mu[i]/2 + c/mu[i]) * inv_q.
  void (*spjotvoll_weights)(const double* mu, std::size_t n, double c, double inv_q, double* w_out);

  /// Barrier exp terms given z[i] = Phi^{-1}(q w[i]):
  ///   df[i] = exp(min(mu[i] z[i] - mu[i]^2/2, 700))
  ///   dd[i] = exp(min(z[i]^2/2 + mu[i] z[i] - mu[i]^2/2, 700))
  /// Both exponents are clamped in log scale: dd diverges as w -> 0 and
  /// df can pass the overflow line for extreme |mu|.
  void (*barrier_exp_terms)(const double* mu, const double* z, std::size_t n, double* df, double* dd);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
};

const Backend& scalar_backend();

/// True when an AVX2+FMA backend was compiled in and this CPU supports it.
bool avx2_available();

/// Active backend: resolved once from PWEIGHT_KERNELS ("scalar", "avx2",
/// "auto"; default auto = best available), overridable via select().
const Backend& active();

/// Force a backend by name; "auto" re-resolves by CPU capability.  Throws
/// std::invalid_argument for unknown names and std::runtime_error when the
/// requested backend is unavailable on this machine.  Not thread-safe
/// against concurrent kernel use; call at startup or in tests.
void select(std::string_view name);

/// All backends usable on this machine (scalar first).
std::vector<const Backend*> available_backends();

}  // namespace pweight::kernels
