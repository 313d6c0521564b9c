#include "pweight/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "pweight/kernels.hpp"
#include "pweight/numkit.hpp"

namespace pweight {

namespace {

// The solver bisections run on sum/target so the value criterion reads as a
// relative sum error; 1e-11 leaves the 1e-8 post-check plenty of headroom
// even where the sum is steep in the multiplier (lambda near its floor).
constexpr double kSumTolBisect = 1e-11;
constexpr double kSumTolFinal = 1e-8;  // hard post-check

void check_q(double q) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::invalid_argument("q must lie in (0,1), got " + std::to_string(q));
  }
}

// Unique values of `v` (exact equality) with multiplicities and, for each
// input index, the position of its unique value.  GWAS inputs carry massive
// ties after rounding; solving per unique value keeps objective evaluations
// at O(#unique).
struct Dedup {
  std::vector<double> values;
  std::vector<double> counts;
  std::vector<std::size_t> slot;  // input index -> unique index
};

Dedup dedup_exact(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  Dedup d;
  d.slot.resize(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double x = v[idx[k]];
    if (d.values.empty() || x != d.values.back()) {
      d.values.push_back(x);
      d.counts.push_back(0.0);
    }
    d.counts.back() += 1.0;
    d.slot[idx[k]] = d.values.size() - 1;
  }
  return d;
}

// arccosh(exp(a)) for a >= 0, stable near a = 0 and overflow-free for any a.
double arccosh_of_exp(double a) {
  if (a <= 0.0) return 0.0;
  if (a >= 30.0) return a + 0.6931471805599453094;  // log(2y) with y = e^a
  const double u = std::expm1(a);
  return std::log1p(u + std::sqrt(u * (u + 2.0)));
}

// Two-sided weight as a function of rho = log(lambda/q) (kept in log space:
// exp(mu^2/2) overflows long before the weights become degenerate).
double two_sided_weight(double abs_mu, double rho, double inv_q) {
  const double a = std::max(rho + 0.5 * abs_mu * abs_mu, 0.0);
  return 2.0 * std_normal_cdf(-arccosh_of_exp(a) / abs_mu) * inv_q;
}

}  // namespace

EffectSizeVector::EffectSizeVector(std::vector<double> mu, Sided sided) : mu_(std::move(mu)), sided_(sided) {}

EffectSizeVector EffectSizeVector::one_sided(std::vector<double> mu) {
  if (mu.empty()) throw std::invalid_argument("EffectSizeVector: empty input");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] < 0.0)) {
      throw std::invalid_argument("one-sided effect sizes must be strictly negative; entry " + std::to_string(i) +
                                  " is " + std::to_string(mu[i]));
    }
  }
  return EffectSizeVector(std::move(mu), Sided::one);
}

EffectSizeVector EffectSizeVector::two_sided(std::vector<double> mu) {
  if (mu.empty()) throw std::invalid_argument("EffectSizeVector: empty input");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0.0 || !std::isfinite(mu[i])) {
      throw std::invalid_argument("two-sided effect sizes must be nonzero and finite; entry " + std::to_string(i) +
                                  " is " + std::to_string(mu[i]));
    }
  }
  return EffectSizeVector(std::move(mu), Sided::two);
}

std::vector<std::size_t> EffectSizeVector::order_abs_ascending() const {
  std::vector<std::size_t> idx(mu_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(mu_[a]) < std::abs(mu_[b]); });
  return idx;
}

void WeightVector::validate() const {
  const double j = static_cast<double>(w.size());
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw std::invalid_argument("WeightVector: negative weight " + std::to_string(x));
    total += x;
  }
  if (std::abs(total - j) > kSumTolFinal * j) {
    throw std::invalid_argument("WeightVector: weights sum to " + std::to_string(total) + ", expected " +
                                std::to_string(j));
  }
  if (std::isfinite(q)) {
    const double cap = (sided == Sided::one) ? 1.0 / q : 0.5 / q;
    for (double x : w) {
      if (x > cap * (1.0 + 1e-9)) {
        throw std::invalid_argument("WeightVector: weight " + std::to_string(x) + " exceeds cap " +
                                    std::to_string(cap));
      }
    }
  }
}

SpjotvollSolution spjotvoll_one_sided(const EffectSizeVector& mu, double q) {
  if (mu.sided() != Sided::one) throw std::invalid_argument("spjotvoll_one_sided: needs one-sided effects");
  check_q(q);
  const auto& vals = mu.values();
  const double j = static_cast<double>(vals.size());
  const double target = j * q;

  const Dedup d = dedup_exact(vals);
  const auto& k = kernels::active();
  auto g = [&](double c) {
    return k.spjotvoll_cdf_sum(d.values.data(), d.counts.data(), d.values.size(), c) / target;
  };

  // G is strictly decreasing (all mu < 0), from J at c -> -inf to 0 at +inf.
  double big_m = 0.0;
  for (double v : d.values) big_m = std::max(big_m, 0.5 * v * v);
  double lo = 0.0, hi = big_m + 50.0;
  double span = hi - lo;
  while (g(lo) < 1.0) {
    lo -= span;
    span *= 2.0;
    if (span > 1e18) {
      throw BracketError("spjotvoll_one_sided: failed to bracket c below (G(lo)/Jq=" + std::to_string(g(lo)) +
                         ", Jq=" + std::to_string(target) + ")");
    }
  }
  span = hi - lo;
  while (g(hi) > 1.0) {
    hi += span;
    span *= 2.0;
    if (span > 1e18) {
      throw BracketError("spjotvoll_one_sided: failed to bracket c above (G(hi)/Jq=" + std::to_string(g(hi)) +
                         ", Jq=" + std::to_string(target) + ")");
    }
  }

  const double c = bisect_decreasing(g, lo, hi, 1.0, kSumTolBisect).x;

  std::vector<double> wu(d.values.size());
  k.spjotvoll_weights(d.values.data(), d.values.size(), c, 1.0 / q, wu.data());

  WeightVector out;
  out.q = q;
  out.sided = Sided::one;
  out.w.resize(vals.size());
  double total = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out.w[i] = wu[d.slot[i]];
    total += out.w[i];
  }
  if (std::abs(total - j) > kSumTolFinal * j) {
    throw std::runtime_error("spjotvoll_one_sided: bisection met its iteration cap but weights sum to " +
                             std::to_string(total) + " != " + std::to_string(j));
  }
  return SpjotvollSolution{std::move(out), c};
}

TwoSidedSolution spjotvoll_two_sided(const EffectSizeVector& mu, double q) {
  if (mu.sided() != Sided::two) throw std::invalid_argument("spjotvoll_two_sided: needs two-sided effects");
  check_q(q);
  const auto& vals = mu.values();
  const double j = static_cast<double>(vals.size());
  const double inv_q = 1.0 / q;

  std::vector<double> abs_mu(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) abs_mu[i] = std::abs(vals[i]);
  const Dedup d = dedup_exact(abs_mu);

  double m = std::numeric_limits<double>::infinity();
  for (double v : d.values) m = std::min(m, 0.5 * v * v);

  // h(rho) = sum_i w(mu_i; q e^rho) / J, strictly decreasing on [-m, inf).
  auto h = [&](double rho) {
    double acc = 0.0;
    for (std::size_t u = 0; u < d.values.size(); ++u) {
      acc += d.counts[u] * two_sided_weight(d.values[u], rho, inv_q);
    }
    return acc / j;
  };

  const double rho_floor = -m;
  const double h_floor = h(rho_floor) * j;
  if (h_floor < j) {
    throw NoInteriorSolutionError(
        "spjotvoll_two_sided: no interior solution (H(q exp(-m)) = " + std::to_string(h_floor) + " < J = " +
            std::to_string(j) + "); decrease q or the effect sizes",
        h_floor, j);
  }

  double hi = rho_floor + 1.0;
  double span = 1.0;
  while (h(hi) > 1.0) {
    hi += span;
    span *= 2.0;
    if (span > 1e9) throw BracketError("spjotvoll_two_sided: failed to bracket lambda");
  }
  const double rho = bisect_decreasing(h, rho_floor, hi, 1.0, kSumTolBisect).x;

  WeightVector out;
  out.q = q;
  out.sided = Sided::two;
  out.w.resize(vals.size());
  std::vector<double> wu(d.values.size());
  for (std::size_t u = 0; u < d.values.size(); ++u) wu[u] = two_sided_weight(d.values[u], rho, inv_q);
  double total = 0.0;
  const double cap = 0.5 * inv_q;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out.w[i] = wu[d.slot[i]];
    total += out.w[i];
  }
  if (std::abs(total - j) > kSumTolFinal * j) {
    throw std::runtime_error("spjotvoll_two_sided: weights sum to " + std::to_string(total) + " != " +
                             std::to_string(j));
  }
  for (double wv : out.w) {
    if (wv > cap * (1.0 + 1e-9)) {
      throw std::runtime_error(
          "spjotvoll_two_sided: stationary weight " + std::to_string(wv) + " exceeds the cap 1/(2q) = " +
          std::to_string(cap) + "; the closed form does not cover cap-active optima (q too large)");
    }
  }
  return TwoSidedSolution{std::move(out), q * std::exp(rho), m};
}

MonotoneRegimeOneSided monotone_regime_one_sided(const EffectSizeVector& mu, double q) {
  if (mu.sided() != Sided::one) throw std::invalid_argument("monotone_regime_one_sided: needs one-sided effects");
  check_q(q);
  const auto& vals = mu.values();
  double big_m = 0.0;
  for (double v : vals) big_m = std::max(big_m, 0.5 * v * v);
  const double g_at_m = kernels::active().spjotvoll_cdf_sum(vals.data(), nullptr, vals.size(), big_m);
  MonotoneRegimeOneSided r;
  r.big_m = big_m;
  r.g_at_m = g_at_m;
  r.monotone = q <= g_at_m / static_cast<double>(vals.size());
  return r;
}

MonotoneRegimeTwoSided monotone_regime_two_sided(const EffectSizeVector& mu, double q) {
  if (mu.sided() != Sided::two) throw std::invalid_argument("monotone_regime_two_sided: needs two-sided effects");
  check_q(q);
  const auto& vals = mu.values();
  const double j = static_cast<double>(vals.size());
  const double inv_q = 1.0 / q;

  double m = std::numeric_limits<double>::infinity();
  double big_m = 0.0;
  for (double v : vals) {
    const double half_sq = 0.5 * v * v;
    m = std::min(m, half_sq);
    big_m = std::max(big_m, half_sq);
  }

  // f2 - f1 with f1(a) = log(a) - m (increasing) and
  // f2(a) = (2a/sqrt(a^2-1) - 1) M (decreasing): strictly decreasing,
  // +inf at 1+ and negative for large a.
  auto diff = [&](double a) {
    const double f1 = std::log(a) - m;
    const double f2 = (2.0 * a / std::sqrt((a - 1.0) * (a + 1.0)) - 1.0) * big_m;
    return f2 - f1;
  };

  double lo = 1.0 + 1e-12;
  double hi = 2.0;
  while (diff(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw BracketError("monotone_regime_two_sided: failed to bracket a*");
  }
  const double a_star = bisect_decreasing(diff, lo, hi, 0.0, 1e-12 * std::max(1.0, big_m + std::abs(m))).x;

  // H(q a* exp(-m)) >= J, evaluated in log space.
  const double rho = std::log(a_star) - m;
  double h = 0.0;
  for (double v : vals) h += two_sided_weight(std::abs(v), rho, inv_q);

  MonotoneRegimeTwoSided r;
  r.a_star = a_star;
  r.m = m;
  r.big_m = big_m;
  r.monotone = h >= j;
  return r;
}

WeightVector exponential_weights(const EffectSizeVector& mu, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("exponential_weights: beta must be >= 0");
  const auto& vals = mu.values();
  const double j = static_cast<double>(vals.size());
  double top = -std::numeric_limits<double>::infinity();
  for (double v : vals) top = std::max(top, beta * std::abs(v));
  std::vector<double> e(vals.size());
  double total = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    e[i] = std::exp(beta * std::abs(vals[i]) - top);
    total += e[i];
  }
  WeightVector out;
  out.sided = mu.sided();
  out.w.resize(vals.size());
  const double scale = j / total;
  for (std::size_t i = 0; i < vals.size(); ++i) out.w[i] = e[i] * scale;
  return out;
}

WeightVector filter_weights(const std::vector<double>& prior_p, double cutoff) {
  if (!(cutoff > 0.0) || !(cutoff < 1.0)) {
    throw std::invalid_argument("filter_weights: cutoff must lie in (0,1)");
  }
  if (prior_p.empty()) throw std::invalid_argument("filter_weights: empty input");
  std::size_t k = 0;
  for (double p : prior_p) {
    if (p <= cutoff) ++k;
  }
  if (k == 0) {
    throw EmptySelectionError("filter_weights: no prior p-value at or below cutoff " + std::to_string(cutoff));
  }
  const double j = static_cast<double>(prior_p.size());
  const double wk = j / static_cast<double>(k);
  WeightVector out;
  out.w.resize(prior_p.size());
  for (std::size_t i = 0; i < prior_p.size(); ++i) out.w[i] = prior_p[i] <= cutoff ? wk : 0.0;
  return out;
}

}  // namespace pweight
