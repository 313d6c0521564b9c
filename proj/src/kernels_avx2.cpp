// AVX2+FMA variants of the batch kernels.  Compiled with -mavx2 -mfma and
// only ever invoked after a runtime cpuid check (see kernels_dispatch.cpp).
//
// exp: Cephes-style range reduction against log 2 with a rational minimax
// for the reduced exponent, exact power-of-two reconstruction through the
// IEEE exponent field.  erfc: Cody's rational Chebyshev approximations
// (netlib specfun), all three ranges evaluated and blended per lane, with
// the classic split-argument trick for exp(-x^2) so tail relative accuracy
// survives the squaring.

#include "pweight/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <limits>

namespace pweight::kernels {

namespace {

inline __m256d v_abs(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

inline __m256d v_exp(__m256d x) {
  const __m256d kLog2e = _mm256_set1_pd(1.44269504088896340736);
  const __m256d kLn2Hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d kLn2Lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d kMax = _mm256_set1_pd(708.0);
  const __m256d kMin = _mm256_set1_pd(-708.0);

  const __m256d big = _mm256_cmp_pd(x, kMax, _CMP_GT_OQ);
  const __m256d small = _mm256_cmp_pd(x, kMin, _CMP_LT_OQ);
  const __m256d nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  const __m256d xs = _mm256_min_pd(_mm256_max_pd(x, kMin), kMax);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xs, kLog2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kLn2Hi, xs);
  r = _mm256_fnmadd_pd(n, kLn2Lo, r);
  const __m256d rr = _mm256_mul_pd(r, r);

  // exp(r) = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)) on |r| <= ln2/2.
  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000005e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // 2^n via the exponent field; |n| <= 1022 after clamping, so no overflow.
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));

  e = _mm256_blendv_pd(e, _mm256_set1_pd(std::numeric_limits<double>::infinity()), big);
  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), small);
  e = _mm256_blendv_pd(e, x, nan);
  return e;
}

// exp(-y^2) with y split at a 1/16 grid so the squared argument is exact.
inline __m256d v_exp_neg_sq(__m256d y) {
  const __m256d ycl = _mm256_min_pd(y, _mm256_set1_pd(27.0));  // exp(-729) == 0 anyway
  const __m256d sixteenth = _mm256_set1_pd(0.0625);
  const __m256d y16 = _mm256_mul_pd(
      _mm256_round_pd(_mm256_mul_pd(ycl, _mm256_set1_pd(16.0)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC),
      sixteenth);
  const __m256d del = _mm256_mul_pd(_mm256_sub_pd(ycl, y16), _mm256_add_pd(ycl, y16));
  const __m256d e1 = v_exp(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(y16, y16)));
  const __m256d e2 = v_exp(_mm256_sub_pd(_mm256_setzero_pd(), del));
  return _mm256_mul_pd(e1, e2);
}

inline __m256d v_erfc(__m256d x) {
  const __m256d a = v_abs(x);
  const __m256d one = _mm256_set1_pd(1.0);

  // |x| <= 0.46875: erfc = 1 - erf, erf from the rational in x^2.
  __m256d ysq = _mm256_mul_pd(x, x);
  __m256d an = _mm256_fmadd_pd(_mm256_set1_pd(0.185777706184603153), ysq, _mm256_set1_pd(3.1611237438705656));
  an = _mm256_fmadd_pd(an, ysq, _mm256_set1_pd(113.864154151050156));
  an = _mm256_mul_pd(an, ysq);
  an = _mm256_fmadd_pd(_mm256_add_pd(an, _mm256_set1_pd(377.485237685302021)), ysq, _mm256_setzero_pd());
  __m256d ad = _mm256_add_pd(ysq, _mm256_set1_pd(23.6012909523441209));
  ad = _mm256_fmadd_pd(ad, ysq, _mm256_setzero_pd());
  ad = _mm256_fmadd_pd(_mm256_add_pd(ad, _mm256_set1_pd(244.024637934444173)), ysq, _mm256_setzero_pd());
  ad = _mm256_fmadd_pd(_mm256_add_pd(ad, _mm256_set1_pd(1282.61652607737228)), ysq, _mm256_setzero_pd());
  const __m256d erf_small = _mm256_div_pd(
      _mm256_mul_pd(x, _mm256_add_pd(an, _mm256_set1_pd(3209.37758913846947))),
      _mm256_add_pd(ad, _mm256_set1_pd(2844.23683343917062)));
  const __m256d erfc_small = _mm256_sub_pd(one, erf_small);

  // 0.46875 < |x| <= 4: erfc = exp(-x^2) * Rb(|x|).
  __m256d bn = _mm256_fmadd_pd(_mm256_set1_pd(2.15311535474403846e-8), a, _mm256_set1_pd(0.564188496988670089));
  bn = _mm256_mul_pd(bn, a);
  bn = _mm256_fmadd_pd(_mm256_add_pd(bn, _mm256_set1_pd(8.88314979438837594)), a, _mm256_setzero_pd());
  bn = _mm256_fmadd_pd(_mm256_add_pd(bn, _mm256_set1_pd(66.1191906371416295)), a, _mm256_setzero_pd());
  bn = _mm256_fmadd_pd(_mm256_add_pd(bn, _mm256_set1_pd(298.635138197400131)), a, _mm256_setzero_pd());
  bn = _mm256_fmadd_pd(_mm256_add_pd(bn, _mm256_set1_pd(881.95222124176909)), a, _mm256_setzero_pd());
  bn = _mm256_fmadd_pd(_mm256_add_pd(bn, _mm256_set1_pd(1712.04761263407058)), a, _mm256_setzero_pd());
  bn = _mm256_fmadd_pd(_mm256_add_pd(bn, _mm256_set1_pd(2051.07837782607147)), a, _mm256_setzero_pd());
  __m256d bd = _mm256_add_pd(a, _mm256_set1_pd(15.7449261107098347));
  bd = _mm256_mul_pd(bd, a);
  bd = _mm256_fmadd_pd(_mm256_add_pd(bd, _mm256_set1_pd(117.693950891312499)), a, _mm256_setzero_pd());
  bd = _mm256_fmadd_pd(_mm256_add_pd(bd, _mm256_set1_pd(537.181101862009858)), a, _mm256_setzero_pd());
  bd = _mm256_fmadd_pd(_mm256_add_pd(bd, _mm256_set1_pd(1621.38957456669019)), a, _mm256_setzero_pd());
  bd = _mm256_fmadd_pd(_mm256_add_pd(bd, _mm256_set1_pd(3290.79923573345963)), a, _mm256_setzero_pd());
  bd = _mm256_fmadd_pd(_mm256_add_pd(bd, _mm256_set1_pd(4362.61909014324716)), a, _mm256_setzero_pd());
  bd = _mm256_fmadd_pd(_mm256_add_pd(bd, _mm256_set1_pd(3439.36767414372164)), a, _mm256_setzero_pd());
  const __m256d rb = _mm256_div_pd(_mm256_add_pd(bn, _mm256_set1_pd(1230.33935479799725)),
                                   _mm256_add_pd(bd, _mm256_set1_pd(1230.33935480374942)));

  // |x| > 4: erfc = exp(-x^2)/|x| * (1/sqrt(pi) - Rc(1/x^2)/x^2).
  const __m256d amin = _mm256_max_pd(a, _mm256_set1_pd(1.0e-30));  // keep unused lanes finite
  const __m256d z = _mm256_div_pd(one, _mm256_mul_pd(amin, amin));
  __m256d cn = _mm256_fmadd_pd(_mm256_set1_pd(0.0163153871373020978), z, _mm256_set1_pd(0.305326634961232344));
  cn = _mm256_mul_pd(cn, z);
  cn = _mm256_fmadd_pd(_mm256_add_pd(cn, _mm256_set1_pd(0.360344899949804439)), z, _mm256_setzero_pd());
  cn = _mm256_fmadd_pd(_mm256_add_pd(cn, _mm256_set1_pd(0.125781726111229246)), z, _mm256_setzero_pd());
  cn = _mm256_fmadd_pd(_mm256_add_pd(cn, _mm256_set1_pd(0.0160837851487422766)), z, _mm256_setzero_pd());
  __m256d cd = _mm256_add_pd(z, _mm256_set1_pd(2.56852019228982242));
  cd = _mm256_mul_pd(cd, z);
  cd = _mm256_fmadd_pd(_mm256_add_pd(cd, _mm256_set1_pd(1.87295284992346047)), z, _mm256_setzero_pd());
  cd = _mm256_fmadd_pd(_mm256_add_pd(cd, _mm256_set1_pd(0.527905102951428412)), z, _mm256_setzero_pd());
  cd = _mm256_fmadd_pd(_mm256_add_pd(cd, _mm256_set1_pd(0.0605183413124413191)), z, _mm256_setzero_pd());
  const __m256d rat = _mm256_mul_pd(z, _mm256_div_pd(_mm256_add_pd(cn, _mm256_set1_pd(6.58749161529837803e-4)),
                                                     _mm256_add_pd(cd, _mm256_set1_pd(0.00233520497626869185))));
  const __m256d rc = _mm256_div_pd(_mm256_sub_pd(_mm256_set1_pd(0.56418958354775628695), rat), amin);

  const __m256d mask_far = _mm256_cmp_pd(a, _mm256_set1_pd(4.0), _CMP_GT_OQ);
  const __m256d tail_rational = _mm256_blendv_pd(rb, rc, mask_far);
  const __m256d erfc_pos = _mm256_mul_pd(v_exp_neg_sq(a), tail_rational);

  const __m256d neg = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
  const __m256d erfc_tail =
      _mm256_blendv_pd(erfc_pos, _mm256_sub_pd(_mm256_set1_pd(2.0), erfc_pos), neg);

  const __m256d mask_small = _mm256_cmp_pd(a, _mm256_set1_pd(0.46875), _CMP_LE_OQ);
  __m256d res = _mm256_blendv_pd(erfc_tail, erfc_small, mask_small);
  const __m256d nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  return _mm256_blendv_pd(res, x, nan);
}

inline __m256d v_norm_cdf(__m256d x) {
  const __m256d kNegInvSqrt2 = _mm256_set1_pd(-0.70710678118654752440);
  return _mm256_mul_pd(_mm256_set1_pd(0.5), v_erfc(_mm256_mul_pd(x, kNegInvSqrt2)));
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

void a_exp_many(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, v_exp(_mm256_loadu_pd(x + i)));
  }
  if (i < n) {
    double buf[4] = {0, 0, 0, 0};
    for (std::size_t k = i; k < n; ++k) buf[k - i] = x[k];
    double res[4];
    _mm256_storeu_pd(res, v_exp(_mm256_loadu_pd(buf)));
    for (std::size_t k = i; k < n; ++k) out[k] = res[k - i];
  }
}

void a_norm_cdf_many(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, v_norm_cdf(_mm256_loadu_pd(x + i)));
  }
  if (i < n) {
    double buf[4] = {0, 0, 0, 0};
    for (std::size_t k = i; k < n; ++k) buf[k - i] = x[k];
    double res[4];
    _mm256_storeu_pd(res, v_norm_cdf(_mm256_loadu_pd(buf)));
    for (std::size_t k = i; k < n; ++k) out[k] = res[k - i];
  }
}

double a_spjotvoll_cdf_sum(const double* mu, const double* count, std::size_t n, double c) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d cc = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m = _mm256_loadu_pd(mu + i);
    const __m256d arg = _mm256_fmadd_pd(half, m, _mm256_div_pd(cc, m));
    const __m256d phi = v_norm_cdf(arg);
    const __m256d w = count ? _mm256_loadu_pd(count + i) : _mm256_set1_pd(1.0);
    acc = _mm256_fmadd_pd(w, phi, acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    double mbuf[4] = {mu[i], -1.0, -1.0, -1.0};
    double res[4];
    const __m256d m = _mm256_loadu_pd(mbuf);
    _mm256_storeu_pd(res, v_norm_cdf(_mm256_fmadd_pd(half, m, _mm256_div_pd(cc, m))));
    total += (count ? count[i] : 1.0) * res[0];
  }
  return total;
}

void a_spjotvoll_weights(const double* mu, std::size_t n, double c, double inv_q, double* w_out) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d cc = _mm256_set1_pd(c);
  const __m256d iq = _mm256_set1_pd(inv_q);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m = _mm256_loadu_pd(mu + i);
    const __m256d arg = _mm256_fmadd_pd(half, m, _mm256_div_pd(cc, m));
    _mm256_storeu_pd(w_out + i, _mm256_mul_pd(v_norm_cdf(arg), iq));
  }
  if (i < n) {
    double mbuf[4] = {-1.0, -1.0, -1.0, -1.0};
    for (std::size_t k = i; k < n; ++k) mbuf[k - i] = mu[k];
    const __m256d m = _mm256_loadu_pd(mbuf);
    double res[4];
    _mm256_storeu_pd(res, _mm256_mul_pd(v_norm_cdf(_mm256_fmadd_pd(half, m, _mm256_div_pd(cc, m))), iq));
    for (std::size_t k = i; k < n; ++k) w_out[k] = res[k - i];
  }
}

void a_barrier_exp_terms(const double* mu, const double* z, std::size_t n, double* df, double* dd) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d cap = _mm256_set1_pd(700.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m = _mm256_loadu_pd(mu + i);
    const __m256d zi = _mm256_loadu_pd(z + i);
    const __m256d base =
        _mm256_min_pd(_mm256_fmsub_pd(m, zi, _mm256_mul_pd(half, _mm256_mul_pd(m, m))), cap);
    _mm256_storeu_pd(df + i, v_exp(base));
    const __m256d arg = _mm256_min_pd(_mm256_fmadd_pd(half, _mm256_mul_pd(zi, zi), base), cap);
    _mm256_storeu_pd(dd + i, v_exp(arg));
  }
  if (i < n) {
    double mbuf[4] = {0, 0, 0, 0}, zbuf[4] = {0, 0, 0, 0};
    for (std::size_t k = i; k < n; ++k) {
      mbuf[k - i] = mu[k];
      zbuf[k - i] = z[k];
    }
    const __m256d m = _mm256_loadu_pd(mbuf);
    const __m256d zi = _mm256_loadu_pd(zbuf);
    const __m256d base =
        _mm256_min_pd(_mm256_fmsub_pd(m, zi, _mm256_mul_pd(half, _mm256_mul_pd(m, m))), cap);
    double r1[4], r2[4];
    _mm256_storeu_pd(r1, v_exp(base));
    _mm256_storeu_pd(r2, v_exp(_mm256_min_pd(_mm256_fmadd_pd(half, _mm256_mul_pd(zi, zi), base), cap)));
    for (std::size_t k = i; k < n; ++k) {
      df[k] = r1[k - i];
      dd[k] = r2[k - i];
    }
  }
}

double a_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double a_sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double total = hsum(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

}  // namespace

const Backend* avx2_backend_impl() {
  static const Backend backend{
      "avx2", a_exp_many, a_norm_cdf_many, a_spjotvoll_cdf_sum, a_spjotvoll_weights, a_barrier_exp_terms,
      a_dot,  a_sum,
  };
  return &backend;
}

}  // namespace pweight::kernels

#endif  // __AVX2__ && __FMA__
