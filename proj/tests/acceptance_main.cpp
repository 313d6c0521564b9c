// Acceptance suite: one check per criterion, each printing a PASS/FAIL line
// with its measured runtime.  Exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pweight/barrier.hpp"
#include "pweight/cli.hpp"
#include "pweight/kernels.hpp"
#include "pweight/numkit.hpp"
#include "pweight/rng.hpp"
#include "pweight/roc.hpp"
#include "pweight/testing.hpp"
#include "pweight/weights.hpp"

using namespace pweight;
using namespace pweight::barrier;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::vector<double> draw_mu_sorted(std::uint64_t seed, std::size_t j) {
  CounterRng rng(seed);
  std::vector<double> mu(j);
  for (std::size_t i = 0; i < j; ++i) mu[i] = -std::abs(rng.normal(i));
  std::sort(mu.begin(), mu.end(), std::greater<double>());
  return mu;
}

double onesided_power_ld(const std::vector<double>& w, const std::vector<double>& mu, double q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    acc += static_cast<double>(oracle::phi(std_normal_quantile(std::min(q * w[i], 1.0 - 1e-16)) - mu[i]));
  }
  return acc;
}

double twosided_power_ld(const std::vector<double>& w, const std::vector<double>& mu, double q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    const double z = std_normal_quantile(0.5 * q * w[i]);
    acc += static_cast<double>(oracle::phi(z - mu[i]) + oracle::phi(z + mu[i]));
  }
  return acc;
}

// Refining grid maximizer over the simplex {w >= 0, sum w = J} intersected
// with per-weight caps, for J = 2 (1-D) and J = 3 (2-D).
std::vector<double> grid_oracle(const std::vector<double>& mu, double cap,
                                const std::function<double(const std::vector<double>&)>& power) {
  const std::size_t j = mu.size();
  const double total = static_cast<double>(j);
  if (j == 2) {
    const auto f = [&](double w1) {
      const double w2 = total - w1;
      if (w2 < 0.0 || w2 > cap) return -1e300;
      return power({w1, w2});
    };
    const double w1 = oracle::grid_maximize(f, std::max(0.0, total - cap), std::min(total, cap), 2000, 4);
    return {w1, total - w1};
  }
  double best1 = 1.0, best2 = 1.0, best = -1e300;
  double a1 = 0.0, b1 = std::min(total, cap), a2 = 0.0, b2 = std::min(total, cap);
  const int pts = 300;
  for (int pass = 0; pass < 4; ++pass) {
    const double s1 = (b1 - a1) / pts, s2 = (b2 - a2) / pts;
    for (int i = 0; i <= pts; ++i) {
      const double w1 = a1 + s1 * i;
      for (int k = 0; k <= pts; ++k) {
        const double w2 = a2 + s2 * k;
        const double w3 = total - w1 - w2;
        if (w3 < 0.0 || w3 > cap) continue;
        const double v = power({w1, w2, w3});
        if (v > best) {
          best = v;
          best1 = w1;
          best2 = w2;
        }
      }
    }
    a1 = std::max(0.0, best1 - 2.0 * s1);
    b1 = std::min(std::min(total, cap), best1 + 2.0 * s1);
    a2 = std::max(0.0, best2 - 2.0 * s2);
    b2 = std::min(std::min(total, cap), best2 + 2.0 * s2);
  }
  return {best1, best2, total - best1 - best2};
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome out;
  CounterRng rng(1001);
  std::uint64_t ctr = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t j = 2 + (trial % 2);
    const bool two_sided = trial >= 25;
    const double q = std::pow(10.0, -4.0 + 2.0 * rng.uniform01(ctr++));
    std::vector<double> mu(j);
    for (auto& m : mu) m = -(0.2 + 2.8 * rng.uniform01(ctr++));

    if (!two_sided) {
      const auto sol = spjotvoll_one_sided(EffectSizeVector::one_sided(mu), q);
      const auto want = grid_oracle(
          mu, 1.0 / q, [&](const std::vector<double>& w) { return onesided_power_ld(w, mu, q); });
      for (std::size_t i = 0; i < j; ++i) {
        out.require(std::abs(sol.weights.w[i] - want[i]) <= 1e-3,
                    "one-sided grid mismatch at trial " + std::to_string(trial));
      }
      // Stationarity through the long-double CDF: G(c) = J q and the
      // per-weight closed form.
      long double g = 0.0L;
      for (double m : mu) g += oracle::phi(0.5L * m + static_cast<long double>(sol.c) / m);
      out.require(std::abs(static_cast<double>(g) - j * q) <= 1e-6 * j * q,
                  "one-sided G(c) = Jq violated at trial " + std::to_string(trial));
      for (std::size_t i = 0; i < j; ++i) {
        const double wi = static_cast<double>(oracle::phi(0.5 * mu[i] + sol.c / mu[i])) / q;
        out.require(std::abs(sol.weights.w[i] - wi) <= 1e-6 * std::max(1.0, wi),
                    "one-sided stationarity at trial " + std::to_string(trial));
      }
    } else {
      const auto sol = spjotvoll_two_sided(EffectSizeVector::two_sided(mu), q);
      const auto want =
          grid_oracle(mu, roc::two_sided_cap(q),
                      [&](const std::vector<double>& w) { return twosided_power_ld(w, mu, q); });
      for (std::size_t i = 0; i < j; ++i) {
        out.require(std::abs(sol.weights.w[i] - want[i]) <= 1e-3,
                    "two-sided grid mismatch at trial " + std::to_string(trial));
      }
      // cosh stationarity: q exp(-mu^2/2) cosh(mu z) equals lambda for all i.
      for (std::size_t i = 0; i < j; ++i) {
        const double z = std_normal_quantile(0.5 * q * sol.weights.w[i]);
        const double statn = q * std::exp(-0.5 * mu[i] * mu[i]) * std::cosh(mu[i] * z);
        out.require(std::abs(statn - sol.lambda) <= 1e-6 * sol.lambda,
                    "two-sided cosh stationarity at trial " + std::to_string(trial));
      }
    }
  }
  return out;
}

Outcome criterion2() {
  Outcome out;
  const std::size_t j = 1000;
  const double q = 1e-7;
  const auto mu = draw_mu_sorted(2001, j);
  const auto effects = EffectSizeVector::one_sided(mu);
  const auto regime = monotone_regime_one_sided(effects, q);
  out.require(regime.monotone, "monotone_regime flag false");
  const auto spjot = spjotvoll_one_sided(effects, q);
  const auto mono = solve_monotone(MonotoneProblem::sorted(mu, q, 0.0, kInf));
  double worst = 0.0;
  for (std::size_t i = 0; i < j; ++i) {
    worst = std::max(worst, std::abs(spjot.weights.w[i] - mono.weights.w[i]));
  }
  out.require(worst <= 1e-3, "max |w_mon - w_spjot| = " + std::to_string(worst));
  out.detail = "max diff " + std::to_string(worst);
  return out;
}

Outcome criterion3() {
  // Driven through the CLI experiment so the externally visible surface is
  // what gets certified: J = 2e4, q = 5e-3, l = 0, u = inf, L = 1e4.
  Outcome out;
  const std::string table = cli::run_experiment("subsample-accuracy", 3001);
  std::istringstream is(table);
  std::string line;
  std::getline(is, line);
  out.require(line == "rank\tmu\tw_full\tw_subsample\tabs_err", "unexpected table header");
  double worst = 0.0;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    std::istringstream fields(line);
    double rank, mu, wf, ws, err;
    fields >> rank >> mu >> wf >> ws >> err;
    worst = std::max(worst, err);
    ++rows;
  }
  out.require(rows == 20000, "expected 20000 rows, got " + std::to_string(rows));
  out.require(worst <= 1e-2, "max abs subsampling error = " + std::to_string(worst));
  out.detail = "max abs error " + std::to_string(worst);
  return out;
}

Outcome criterion4() {
  // Driven through the CLI experiment: J = 1e4, q = 0.05/J, the full
  // l-grid, u in {2, 10, inf}, plus reference powers in every row.
  Outcome out;
  const std::string table = cli::run_experiment("power-loss", 4001);
  std::istringstream is(table);
  std::string line;
  std::getline(is, line);
  out.require(line == "l\tu\tpower_monotone\tpower_unweighted\tpower_spjotvoll",
              "unexpected table header");
  std::size_t rows = 0;
  double p_un = 0.0, p_spjot = 0.0;
  while (std::getline(is, line)) {
    std::istringstream fields(line);
    double l, p, pu, ps;
    std::string u_text;
    fields >> l >> u_text >> p >> pu >> ps;
    const double u = u_text == "inf" ? kInf : std::stod(u_text);
    p_un = pu;
    p_spjot = ps;
    ++rows;
    const std::string cell = " at l=" + std::to_string(l) + ", u=" + u_text;
    if (u == 2.0) {
      out.require(p <= 0.5 * ps, "u=2 power ratio " + std::to_string(p / ps) + cell);
    }
    if (std::isinf(u) && l <= 0.1) {
      out.require(p >= 0.9 * ps, "u=inf power ratio " + std::to_string(p / ps) + cell);
    }
    out.require(p >= pu - 1e-9, "monotone below unweighted" + cell);
    out.require(p <= ps + 1e-9, "monotone above Spjotvoll" + cell);
  }
  out.require(rows == 21, "expected 21 grid rows, got " + std::to_string(rows));
  char buf[128];
  std::snprintf(buf, sizeof(buf), "p_un=%.3f p_spjot=%.3f", p_un, p_spjot);
  out.detail = buf;
  return out;
}

Outcome criterion5() {
  Outcome out;
  const std::string table = cli::run_experiment("timing", 5001);
  // Parse the J = 1e5 row: J, trials, mean, se2, median.
  std::istringstream is(table);
  std::string line;
  std::getline(is, line);  // header
  double median_1e5 = -1.0;
  std::string rows;
  while (std::getline(is, line)) {
    std::istringstream fields(line);
    double jval, trials, mean, se2, median;
    fields >> jval >> trials >> mean >> se2 >> median;
    if (jval == 100000.0) median_1e5 = median;
    rows += " J=" + std::to_string(static_cast<long>(jval)) + " median=" + std::to_string(median) + "s";
  }
  out.require(median_1e5 >= 0.0, "timing table missing the J=1e5 row");
  out.require(median_1e5 < 5.0, "J=1e5 median " + std::to_string(median_1e5) + "s >= 5s");
  out.detail = rows;
  return out;
}

Outcome criterion6() {
  Outcome out;
  // (a) roc_hess <= 0 for mu < 0 at 1e3 random points.
  CounterRng rng(6001);
  for (int i = 0; i < 1000; ++i) {
    const double mu = -5.0 * rng.uniform01(3 * i) - 1e-3;
    const double q = std::pow(10.0, -8.0 + 7.0 * rng.uniform01(3 * i + 1));
    const double w = (0.01 + 0.98 * rng.uniform01(3 * i + 2)) / q;
    out.require(roc::roc_hess(w, mu, q) <= 0.0, "roc_hess sign at sample " + std::to_string(i));
  }
  // (b) two-sided second differences <= 1e-9 for |mu1| > mu0 = 0.
  for (double mu : {-0.4, -1.1, -2.5, -4.0}) {
    const double q = 0.01;
    const double cap = roc::two_sided_cap(q);
    const auto g = [&](double w) { return roc::two_sided_power(w, mu, q); };
    for (int i = 1; i < 100; ++i) {
      const double w = cap * i / 101.0;
      out.require(oracle::second_diff(g, w, cap * 2e-4) <= 1e-9,
                  "two-sided convexity bump at mu=" + std::to_string(mu));
    }
  }
  // (c) general ROC concave for theta1 < theta0 on all provided families.
  const roc::MlrFamily* fams[] = {&roc::gaussian_location(), &roc::laplace_location(),
                                  &roc::logistic_location()};
  for (const auto* fam : fams) {
    const auto g = [&](double x) { return roc::general_roc(*fam, -1.2, 0.3, x); };
    for (int i = 1; i <= 100; ++i) {
      const double x = i / 101.0;
      out.require(oracle::second_diff(g, x, 1e-3) <= 1e-9,
                  std::string("ROC convexity bump, family ") + std::string(fam->name()));
    }
  }
  return out;
}

Outcome criterion7() {
  Outcome out;
  CounterRng rng(7001);
  const std::size_t j = 8;
  for (int trial = 0; trial < 50; ++trial) {
    auto mu = draw_mu_sorted(7100 + trial, j);
    for (auto& m : mu) m = std::min(m, -0.05);
    const double q = std::pow(10.0, -5.0 + 3.0 * rng.uniform01(200 + trial));
    const MonotoneProblem prob = MonotoneProblem::sorted(mu, q, 0.1, 3.0);
    // Random strictly feasible point: mix the ramp with sorted jitter.
    std::vector<double> w = feasible_start(j, prob.lower(), prob.upper(), prob.q());
    std::vector<double> jit(j);
    for (std::size_t i = 0; i < j; ++i) jit[i] = 0.4 + 1.6 * rng.uniform01(1000 + trial * 31 + i);
    std::sort(jit.begin(), jit.end());
    double total = std::accumulate(jit.begin(), jit.end(), 0.0);
    for (double& x : jit) x *= static_cast<double>(j) / total;
    for (std::size_t i = 0; i < j; ++i) w[i] = 0.75 * w[i] + 0.25 * jit[i];

    const double t = std::pow(10.0, 3.0 * rng.uniform01(300 + trial));
    const auto d = centering_derivatives(w, t, prob);
    for (std::size_t i = 0; i < j; ++i) {
      auto fi = [&](double x) {
        std::vector<double> wx(w);
        wx[i] = x;
        return centering_objective(wx, t, prob);
      };
      const double fd = oracle::central_diff(fi, w[i], 1e-6);
      out.require(std::abs(d.grad[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)),
                  "gradient FD mismatch, trial " + std::to_string(trial));
      const double sd = oracle::second_diff(fi, w[i], 5e-5);
      out.require(std::abs(d.hess.diag()[i] - sd) <= 1e-3 * std::max(1.0, std::abs(sd)),
                  "hessian FD mismatch, trial " + std::to_string(trial));
    }
  }
  return out;
}

Outcome criterion8() {
  Outcome out;
  const std::size_t j = 1000;
  const auto mu = draw_mu_sorted(8001, j);
  long steps = 0;
  double worst_resid = 0.0, worst_edot = 0.0;
  const auto sol = solve_monotone(MonotoneProblem::sorted(mu, 1e-7, 0.0, kInf), BarrierConfig{},
                                  [&](const NewtonStepInfo& info) {
                                    ++steps;
                                    worst_resid = std::max(worst_resid, info.kkt_residual);
                                    worst_edot = std::max(worst_edot, info.e_dot_dw);
                                  });
  (void)sol;
  out.require(steps > 0, "no Newton steps logged");
  out.require(worst_resid <= 1e-9, "KKT residual " + std::to_string(worst_resid));
  out.require(worst_edot <= 1e-9 * static_cast<double>(j), "e . dw " + std::to_string(worst_edot));
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%ld steps, max resid %.2e, max e.dw %.2e", steps, worst_resid, worst_edot);
  out.detail = buf;
  return out;
}

Outcome criterion9() {
  Outcome out;
  const std::size_t j = 10000;
  const double q = 0.05 / static_cast<double>(j);
  const auto mu = draw_mu_sorted(9001, j);
  const auto wv = solve_monotone(MonotoneProblem::sorted(mu, q, 0.5, kInf)).weights;

  const int reps = 10000;
  CounterRng rng(9002);
  int any_rejection = 0;
  for (int rep = 0; rep < reps; ++rep) {
    bool any = false;
    const std::uint64_t base = static_cast<std::uint64_t>(rep) * j;
    for (std::size_t i = 0; i < j; ++i) {
      if (rng.uniform01(base + i) <= q * wv.w[i]) {
        any = true;
        break;
      }
    }
    any_rejection += any ? 1 : 0;
  }
  const double fwer = static_cast<double>(any_rejection) / reps;
  const double se = std::sqrt(0.05 * 0.95 / reps);
  out.require(fwer <= 0.05 + 3.0 * se,
              "empirical FWER " + std::to_string(fwer) + " > " + std::to_string(0.05 + 3.0 * se));
  out.detail = "FWER " + std::to_string(fwer) + " (bound " + std::to_string(0.05 + 3.0 * se) + ")";
  return out;
}

Outcome criterion10() {
  Outcome out;
  {
    WeightVector wv;
    wv.w = {1e-9, 2.0 - 1e-9};
    const auto r = testing::weighted_bonferroni(std::vector<double>{1e-10, 0.5}, wv, 0.05);
    out.require(std::abs(r.weighted_p[0] - 0.1) <= 1e-12, "Q != 0.1");
    out.require(!r.rejected[0], "meager weighted p-value rejected");
  }
  {
    WeightVector wv;
    wv.w = {0.5, 0.6, 2.9};
    const auto r = testing::weighted_bonferroni(std::vector<double>{2.5e-8, 1e-8, 0.9}, wv, 5e-8);
    out.require(r.rejected[0] && r.rejected[1], "l = 0.5 floor guarantee failed");
    out.require(!r.rejected[2], "non-significant p rejected");
  }
  {
    WeightVector wv;
    wv.w = {1.0, 1.0, 1.0};
    const auto r = testing::weighted_bonferroni(std::vector<double>{0.05, 0.049, 0.051}, wv, 0.05);
    out.require(r.rejected[0], "boundary tie not rejected");
    out.require(r.rejected[1] && !r.rejected[2], "plain Bonferroni rule broken");
  }
  return out;
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  struct Entry {
    int id;
    const char* label;
    double budget_seconds;  // 0 = no stated budget
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, "Spjotvoll closed-form correctness vs grid oracles + stationarity", 60.0, criterion1},
      {2, "monotone == Spjotvoll in the small-q regime (J=1e3, q=1e-7)", 5.0, criterion2},
      {3, "subsampling accuracy (J=2e4, q=5e-3, L=1e4)", 30.0, criterion3},
      {4, "power-loss reproduction (J=1e4, l-grid x u in {2,10,inf})", 120.0, criterion4},
      {5, "timing sweep (median J=1e5 solve under 5 s)", 0.0, criterion5},
      {6, "concavity property suite (hess sign, two-sided, MLR families)", 10.0, criterion6},
      {7, "centering derivatives vs finite differences (50 points)", 5.0, criterion7},
      {8, "KKT residual and e.dw at every Newton step (J=1e3 solve)", 0.0, criterion8},
      {9, "FWER simulation under the global null (1e4 replications)", 60.0, criterion9},
      {10, "weighted-testing fixed points", 0.0, criterion10},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (e.budget_seconds > 0.0 && secs >= e.budget_seconds) {
      out.pass = false;
      out.detail += (out.detail.empty() ? "" : "; ") + std::string("runtime budget exceeded");
    }
    std::printf("%s  criterion %2d: %s (%.1fs%s%s)\n", out.pass ? "PASS" : "FAIL", e.id, e.label, secs,
                out.detail.empty() ? "" : "; ", out.detail.c_str());
    failures += out.pass ? 0 : 1;
  }
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures;
}
