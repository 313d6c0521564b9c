#include "pweight/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pweight/kernels.hpp"
#include "pweight/roc.hpp"

namespace pweight::barrier {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;
constexpr double kInf = std::numeric_limits<double>::infinity();

// gaps[0] = w_1 - l, gaps[i] = w_{i+1} - w_i, gaps[J] = cap - w_J.
// Returns false (without filling the rest) as soon as a gap is nonpositive.
bool compute_gaps(std::span<const double> w, double l, double cap, std::vector<double>& gaps) {
  const std::size_t j = w.size();
  gaps.resize(j + 1);
  double prev = l;
  for (std::size_t i = 0; i < j; ++i) {
    const double g = w[i] - prev;
    if (!(g > 0.0)) return false;
    gaps[i] = g;
    prev = w[i];
  }
  const double g = cap - prev;
  if (!(g > 0.0)) return false;
  gaps[j] = g;
  return true;
}

void average_exact_ties(std::span<const double> mu, std::vector<double>& w) {
  std::size_t i = 0;
  while (i < mu.size()) {
    std::size_t k = i + 1;
    while (k < mu.size() && mu[k] == mu[i]) ++k;
    if (k - i > 1) {
      double mean = 0.0;
      for (std::size_t s = i; s < k; ++s) mean += w[s];
      mean /= static_cast<double>(k - i);
      for (std::size_t s = i; s < k; ++s) w[s] = mean;
    }
    i = k;
  }
}

double backtrack_impl(std::span<const double> w, std::span<const double> delta_w, double t,
                      const MonotoneProblem& prob, double ls_alpha, double ls_beta, double g0, double gdot) {
  std::vector<double> trial(w.size());
  // At large t the objective magnitude is t * sum f while Armijo margins
  // shrink like the squared decrement; once the margin drops below the
  // objective's fp resolution the comparison carries no information and a
  // strictly feasible step that does not measurably increase g is accepted.
  const double g_noise = 16.0 * std::numeric_limits<double>::epsilon() * (std::abs(g0) + 1.0);
  double s = 1.0;
  while (s >= 1e-16) {
    for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] + s * delta_w[i];
    const double obj = centering_objective(trial, t, prob);
    if (obj <= g0 + ls_alpha * s * gdot) return s;  // infeasible points give +inf and fall through
    if (std::isfinite(obj) && std::abs(ls_alpha * s * gdot) < g_noise && obj <= g0 + g_noise) return s;
    s *= ls_beta;
  }
  throw LineSearchError("backtracking line search stalled below 1e-16; centering cannot make progress");
}

}  // namespace

void BarrierConfig::validate() const {
  if (!(t0 > 0.0)) throw std::invalid_argument("BarrierConfig: t0 must be positive");
  if (!(kappa > 1.0)) throw std::invalid_argument("BarrierConfig: kappa must exceed 1");
  if (!(eps > 0.0)) throw std::invalid_argument("BarrierConfig: eps must be positive");
  if (!(ls_alpha > 0.0) || !(ls_alpha < 0.5)) throw std::invalid_argument("BarrierConfig: ls_alpha outside (0, 0.5)");
  if (!(ls_beta > 0.0) || !(ls_beta < 1.0)) throw std::invalid_argument("BarrierConfig: ls_beta outside (0, 1)");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("BarrierConfig: newton_tol must be positive");
  if (max_newton < 1) throw std::invalid_argument("BarrierConfig: max_newton must be >= 1");
  if (subsample_limit < 2) throw std::invalid_argument("BarrierConfig: subsample_limit must be >= 2");
  if (!(dedup_c0 > 0.0)) throw std::invalid_argument("BarrierConfig: dedup_c0 must be positive");
}

MonotoneProblem MonotoneProblem::sorted(std::vector<double> mu_desc, double q, double l, double u) {
  if (mu_desc.empty()) throw std::invalid_argument("MonotoneProblem: empty effect vector");
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("MonotoneProblem: q must lie in (0,1)");
  for (std::size_t i = 0; i < mu_desc.size(); ++i) {
    if (!(mu_desc[i] < 0.0) || !std::isfinite(mu_desc[i])) {
      throw std::invalid_argument("MonotoneProblem: effect sizes must be finite and strictly negative");
    }
    if (i > 0 && mu_desc[i] > mu_desc[i - 1]) {
      throw std::invalid_argument("MonotoneProblem: effects must be sorted descending (|mu| ascending)");
    }
  }
  const double cap = std::min(u, 1.0 / q);
  if (!(l >= 0.0) || !(l < 1.0) || !(cap > 1.0)) {
    throw InfeasibleBoundsError("MonotoneProblem: bounds must satisfy 0 <= l < 1 < min(u, 1/q); got l=" +
                                std::to_string(l) + ", cap=" + std::to_string(cap));
  }
  MonotoneProblem p;
  p.mu_ = std::move(mu_desc);
  p.q_ = q;
  p.l_ = l;
  p.u_ = u;
  p.cap_ = cap;
  return p;
}

MonotoneProblem MonotoneProblem::from_effects(const EffectSizeVector& mu, double q, double l, double u) {
  if (mu.sided() != Sided::one) throw std::invalid_argument("MonotoneProblem: needs one-sided effects");
  const auto order = mu.order_abs_ascending();
  std::vector<double> sorted_mu(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) sorted_mu[k] = mu.values()[order[k]];
  MonotoneProblem p = MonotoneProblem::sorted(std::move(sorted_mu), q, l, u);
  p.input_to_sorted_.resize(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) p.input_to_sorted_[order[k]] = k;
  return p;
}

std::vector<double> MonotoneProblem::weights_in_input_order(std::span<const double> w_sorted) const {
  if (w_sorted.size() != size()) throw std::invalid_argument("weights_in_input_order: dimension mismatch");
  if (input_to_sorted_.empty()) return std::vector<double>(w_sorted.begin(), w_sorted.end());
  std::vector<double> out(w_sorted.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w_sorted[input_to_sorted_[i]];
  return out;
}

std::vector<double> feasible_start(std::size_t j, double l, double u, double q) {
  if (j == 0) throw std::invalid_argument("feasible_start: J must be >= 1");
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("feasible_start: q must lie in (0,1)");
  const double cap = std::min(u, 1.0 / q);
  if (!(l >= 0.0) || !(l < 1.0) || !(cap > 1.0)) {
    throw InfeasibleBoundsError("feasible_start: bounds must satisfy 0 <= l < 1 < min(u, 1/q)");
  }
  std::vector<double> w(j, 1.0);
  if (j == 1) return w;
  const double vmax = 0.5 * static_cast<double>(j - 1);
  const double delta = 0.9 * std::min((1.0 - l) / vmax, (cap - 1.0) / vmax);
  const double mid = 0.5 * static_cast<double>(j + 1);
  for (std::size_t i = 0; i < j; ++i) {
    w[i] = 1.0 + delta * (static_cast<double>(i + 1) - mid);
  }
  return w;
}

double centering_objective(std::span<const double> w, double t, const MonotoneProblem& prob) {
  if (w.size() != prob.size()) throw std::invalid_argument("centering_objective: dimension mismatch");
  std::vector<double> gaps;
  if (!compute_gaps(w, prob.lower(), prob.cap(), gaps)) return kInf;
  const double q = prob.q();
  double power = 0.0;
  double logbar = 0.0;
  for (double g : gaps) logbar += std::log(g);
  std::vector<double> shifted(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    shifted[i] = std_normal_quantile(q * w[i]) - prob.mu()[i];
  }
  std::vector<double> phi(w.size());
  kernels::active().norm_cdf_many(shifted.data(), phi.data(), shifted.size());
  power = kernels::active().sum(phi.data(), phi.size());
  return -t * power - logbar;
}

CenteringDerivatives centering_derivatives(std::span<const double> w, double t, const MonotoneProblem& prob) {
  const std::size_t j = w.size();
  if (j != prob.size()) throw std::invalid_argument("centering_derivatives: dimension mismatch");
  std::vector<double> gaps;
  if (!compute_gaps(w, prob.lower(), prob.cap(), gaps)) {
    throw std::invalid_argument("centering_derivatives: point is not strictly feasible");
  }
  const double q = prob.q();
  const auto& mu = prob.mu();
  const auto& k = kernels::active();

  std::vector<double> z(j);
  for (std::size_t i = 0; i < j; ++i) z[i] = std_normal_quantile(q * w[i]);

  std::vector<double> df(j), dd(j);
  k.barrier_exp_terms(mu.data(), z.data(), j, df.data(), dd.data());

  std::vector<double> shifted(j), phi(j);
  for (std::size_t i = 0; i < j; ++i) shifted[i] = z[i] - mu[i];
  k.norm_cdf_many(shifted.data(), phi.data(), j);
  double logbar = 0.0;
  for (double g : gaps) logbar += std::log(g);
  const double objective = -t * k.sum(phi.data(), j) - logbar;

  std::vector<double> grad(j), diag(j), off(j > 1 ? j - 1 : 0);
  const double qt = q * t;
  const double q2t = q * q * t * kSqrt2Pi;
  std::vector<double> inv_gap(j + 1);
  for (std::size_t i = 0; i <= j; ++i) inv_gap[i] = 1.0 / gaps[i];
  for (std::size_t i = 0; i < j; ++i) {
    grad[i] = -qt * df[i] - inv_gap[i] + inv_gap[i + 1];
    diag[i] = q2t * (-mu[i]) * dd[i] + inv_gap[i] * inv_gap[i] + inv_gap[i + 1] * inv_gap[i + 1];
  }
  for (std::size_t i = 0; i + 1 < j; ++i) off[i] = -inv_gap[i + 1] * inv_gap[i + 1];

  return CenteringDerivatives{objective, std::move(grad),
                              TridiagonalMatrix::symmetric(std::move(off), std::move(diag))};
}

KktStep kkt_newton_step(const TridiagonalMatrix& hess, std::span<const double> grad) {
  const std::size_t j = hess.size();
  if (grad.size() != j) throw std::invalid_argument("kkt_newton_step: dimension mismatch");
  const auto& k = kernels::active();

  std::vector<double> ones(j, 1.0);
  std::vector<double> a(j), b(j), scratch(j);
  solve_tridiagonal(hess, ones, a, scratch);
  solve_tridiagonal(hess, grad, b, scratch);

  const double ea = k.sum(a.data(), j);
  const double eb = k.sum(b.data(), j);
  const double nu = -eb / ea;

  KktStep step;
  step.nu = nu;
  step.delta_w.resize(j);
  for (std::size_t i = 0; i < j; ++i) step.delta_w[i] = -(b[i] + nu * a[i]);

  // Residual of [H e; e^T 0][dw; nu] = [-grad; 0], relative to the gradient.
  const std::vector<double> hdw = hess.multiply(step.delta_w);
  double rmax = 0.0, gmax = 0.0;
  for (std::size_t i = 0; i < j; ++i) {
    rmax = std::max(rmax, std::abs(hdw[i] + nu + grad[i]));
    gmax = std::max(gmax, std::abs(grad[i]));
  }
  step.residual = rmax / (gmax + 1.0);
  step.e_dot_dw = std::abs(k.sum(step.delta_w.data(), j));
  return step;
}

double newton_decrement(std::span<const double> delta_w, const TridiagonalMatrix& hess) {
  return std::sqrt(std::max(hess.quadratic_form(delta_w), 0.0));
}

double backtracking_search(std::span<const double> w, std::span<const double> delta_w, double t,
                           const MonotoneProblem& prob, double ls_alpha, double ls_beta) {
  if (w.size() != delta_w.size()) throw std::invalid_argument("backtracking_search: dimension mismatch");
  const CenteringDerivatives d = centering_derivatives(w, t, prob);
  const double gdot = kernels::active().dot(d.grad.data(), delta_w.data(), w.size());
  if (!(gdot < 0.0)) {
    throw std::invalid_argument("backtracking_search: delta_w is not a descent direction (grad . dw = " +
                                std::to_string(gdot) + ")");
  }
  return backtrack_impl(w, delta_w, t, prob, ls_alpha, ls_beta, d.objective, gdot);
}

std::vector<double> solve_centering(std::vector<double> w0, double t, const MonotoneProblem& prob,
                                    const BarrierConfig& cfg, int outer_index, long* newton_steps,
                                    const StepObserver& observer) {
  // Once the decrement sits inside the quadratic-convergence region, the
  // per-step progress scales like lambda^2 while |g| grows with t; when
  // that falls below double resolution the iterate is as centered as the
  // arithmetic allows and the (J+1)/t certificate loses only an O(lambda)
  // factor.
  constexpr double kQuadPhase = 0.25;
  std::vector<double> w = std::move(w0);
  double last_decrement = kInf;
  for (int iter = 0; iter < cfg.max_newton; ++iter) {
    const CenteringDerivatives d = centering_derivatives(w, t, prob);
    const KktStep step = kkt_newton_step(d.hess, d.grad);
    const double lambda = newton_decrement(step.delta_w, d.hess);
    last_decrement = lambda;
    if (0.5 * lambda * lambda < cfg.newton_tol) return w;
    const double obj_noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(d.objective) + 1.0);
    if (lambda < kQuadPhase && 0.5 * lambda * lambda < obj_noise) return w;  // numerically centered

    const double gdot = kernels::active().dot(d.grad.data(), step.delta_w.data(), w.size());
    if (!(gdot < 0.0)) return w;  // numerically converged: no descent left
    double s = 0.0;
    try {
      s = backtrack_impl(w, step.delta_w, t, prob, cfg.ls_alpha, cfg.ls_beta, d.objective, gdot);
    } catch (const LineSearchError&) {
      if (lambda < kQuadPhase) return w;  // decrease below fp resolution
      throw;
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += s * step.delta_w[i];
    if (newton_steps != nullptr) ++*newton_steps;
    if (observer) observer(NewtonStepInfo{t, outer_index, lambda, step.residual, step.e_dot_dw, s});
  }
  throw ConvergenceError("solve_centering: max_newton = " + std::to_string(cfg.max_newton) +
                             " reached at t = " + std::to_string(t) + " (last decrement " +
                             std::to_string(last_decrement) + ")",
                         last_decrement);
}

MonotoneSolution solve_monotone(const MonotoneProblem& prob, const BarrierConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  const std::size_t j = prob.size();
  if (j > cfg.subsample_limit) {
    throw std::invalid_argument("solve_monotone: J = " + std::to_string(j) + " exceeds subsample_limit = " +
                                std::to_string(cfg.subsample_limit) + "; use subsample_solve");
  }

  MonotoneSolution sol;
  sol.weights.q = prob.q();
  sol.weights.sided = Sided::one;

  if (j == 1) {
    // The sum constraint pins the only weight.
    sol.weights.w = prob.weights_in_input_order(std::vector<double>{1.0});
    sol.diagnostics.final_t = cfg.t0;
    return sol;
  }

  std::vector<double> w = feasible_start(j, prob.lower(), prob.upper(), prob.q());
  double t = cfg.t0;
  const double n_ineq = static_cast<double>(j + 1);
  try {
    for (;;) {
      w = solve_centering(std::move(w), t, prob, cfg, sol.diagnostics.outer_iterations,
                          &sol.diagnostics.total_newton_steps, observer);
      ++sol.diagnostics.outer_iterations;
      if (n_ineq / t <= cfg.eps) break;
      t *= cfg.kappa;
    }
  } catch (const DegeneracyError& e) {
    throw ConvergenceError(std::string("solve_monotone: ") + e.what() +
                               "; the KKT system degenerated — rerun through subsample_solve with a smaller L",
                           kInf);
  } catch (const LineSearchError& e) {
    throw ConvergenceError(std::string("solve_monotone: ") + e.what() +
                               "; centering stalled — rerun through subsample_solve with a smaller L",
                           kInf);
  }
  sol.diagnostics.final_t = t;

  average_exact_ties(prob.mu(), w);
  sol.weights.w = prob.weights_in_input_order(w);
  return sol;
}

MonotoneSolution subsample_solve(const MonotoneProblem& prob, const BarrierConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  const std::size_t j = prob.size();
  if (j <= cfg.subsample_limit) return solve_monotone(prob, cfg, observer);

  const std::size_t big_l = cfg.subsample_limit;
  const auto& mu = prob.mu();

  // Evenly spaced selection over 1..J, endpoints included.
  std::vector<std::size_t> selected;
  selected.reserve(big_l);
  const double stride = static_cast<double>(j - 1) / static_cast<double>(big_l - 1);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (std::size_t k = 0; k < big_l; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * stride));
    if (idx != prev) selected.push_back(idx);
    prev = idx;
  }

  // Dedup pass: advance the anchor only once the mean drops below
  // anchor - c0, collapsing near-ties that ill-condition the KKT system.
  std::vector<std::size_t> kept;
  kept.reserve(selected.size());
  double anchor = 0.0;
  for (std::size_t idx : selected) {
    if (kept.empty() || mu[idx] < anchor - cfg.dedup_c0) {
      kept.push_back(idx);
      anchor = mu[idx];
    }
  }

  std::vector<double> mu_red(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) mu_red[k] = mu[kept[k]];
  const MonotoneProblem reduced = MonotoneProblem::sorted(mu_red, prob.q(), prob.lower(), prob.upper());
  MonotoneSolution red_sol = solve_monotone(reduced, cfg, observer);
  const std::vector<double>& w_red = red_sol.weights.w;  // reduced order == sorted order

  // Piecewise-linear interpolation in mu between the solved knots, constant
  // beyond the end knots.  Both arrays descend, so one sweep suffices.
  std::vector<double> w(j);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < j; ++i) {
    const double m = mu[i];
    if (m >= mu_red.front()) {
      w[i] = w_red.front();
      continue;
    }
    if (m <= mu_red.back()) {
      w[i] = w_red.back();
      continue;
    }
    while (seg + 2 < mu_red.size() && mu_red[seg + 1] >= m) ++seg;
    const double x0 = mu_red[seg], x1 = mu_red[seg + 1];
    const double theta = (x0 - m) / (x0 - x1);
    w[i] = (1.0 - theta) * w_red[seg] + theta * w_red[seg + 1];
  }

  const auto& kern = kernels::active();
  const double jd = static_cast<double>(j);
  double total = kern.sum(w.data(), j);
  double scale = jd / total;
  for (double& x : w) x *= scale;
  for (double& x : w) x = std::clamp(x, prob.lower(), prob.cap());
  total = kern.sum(w.data(), j);
  scale = jd / total;
  for (double& x : w) x *= scale;
  // The second renormalization moves things by O(interp error / J); clamp
  // once more so the box holds exactly, at sum drift far below 1e-8.
  for (double& x : w) x = std::clamp(x, prob.lower(), prob.cap());

  MonotoneSolution sol;
  sol.weights.q = prob.q();
  sol.weights.sided = Sided::one;
  sol.weights.w = prob.weights_in_input_order(w);
  sol.diagnostics = red_sol.diagnostics;
  sol.diagnostics.subsampled = true;
  sol.diagnostics.reduced_size = kept.size();
  return sol;
}

double power_of_weights(std::span<const double> w, std::span<const double> mu, double q) {
  if (w.size() != mu.size()) throw std::invalid_argument("power_of_weights: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += roc::roc_value(w[i], mu[i], q);
  return acc;
}

}  // namespace pweight::barrier
