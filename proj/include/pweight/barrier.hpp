#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pweight/numkit.hpp"
#include "pweight/weights.hpp"

namespace pweight::barrier {

struct InfeasibleBoundsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct LineSearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Centering did not reach the decrement threshold within max_newton steps,
/// or a line search stalled.  Large instances should go through
/// subsample_solve instead.
struct ConvergenceError : std::runtime_error {
  double last_decrement;
  ConvergenceError(const std::string& msg, double dec) : std::runtime_error(msg), last_decrement(dec) {}
};

struct BarrierConfig {
  double t0 = 1.0;      // initial barrier parameter
  double kappa = 10.0;  // outer-loop multiplier on t
  /// Absolute duality-gap target: the outer loop stops once (J+1)/t <= eps,
  /// certifying the objective is within eps of the constrained optimum.
  /// Tightening below 1e-6 buys weight accuracy roughly linearly in eps but
  /// drives t past what the direct KKT factorization tolerates at J ~ 1e4
  /// (the ill-conditioning that subsampling exists to avoid); pass a
  /// smaller eps only on problems well inside the solver's size range.
  double eps = 1e-6;
  double ls_alpha = 0.01;  // Armijo fraction
  double ls_beta = 0.5;    // backtracking shrink
  double newton_tol = 1e-9;  // stop centering when lambda^2/2 < newton_tol
  int max_newton = 200;
  std::size_t subsample_limit = 10000;  // L: largest size solved directly
  double dedup_c0 = 1e-6;               // tie-collapse constant for subsampling

  void validate() const;
};

/// Bounded monotone weight program: maximize sum_i f(w_i; mu_i, q) subject
/// to sum w = J and l <= w_1 <= ... <= w_J <= min(u, 1/q), with mu sorted
/// descending (0 > mu_1 >= ... >= mu_J, i.e. |mu| ascending).  u may be
/// +infinity; the effective cap is then 1/q.
class MonotoneProblem {
 public:
  /// mu already sorted descending.
  static MonotoneProblem sorted(std::vector<double> mu_desc, double q, double l, double u);

  /// Sorts by |mu| ascending internally and remembers the permutation so
  /// weights_in_input_order() can restore caller order.
  static MonotoneProblem from_effects(const EffectSizeVector& mu, double q, double l, double u);

  const std::vector<double>& mu() const { return mu_; }
  std::size_t size() const { return mu_.size(); }
  double q() const { return q_; }
  double lower() const { return l_; }
  double upper() const { return u_; }
  double cap() const { return cap_; }  // min(u, 1/q)

  /// Maps solver-order weights back to the caller order used at
  /// construction (identity for sorted()).
  std::vector<double> weights_in_input_order(std::span<const double> w_sorted) const;

 private:
  MonotoneProblem() = default;
  std::vector<double> mu_;
  std::vector<std::size_t> input_to_sorted_;  // empty == identity
  double q_ = 0.0, l_ = 0.0, u_ = 0.0, cap_ = 0.0;
};

struct CenteringDerivatives {
  double objective = 0.0;
  std::vector<double> grad;
  TridiagonalMatrix hess;
};

struct KktStep {
  std::vector<double> delta_w;
  double nu = 0.0;
  double residual = 0.0;  // relative inf-norm residual of the KKT system
  double e_dot_dw = 0.0;  // |e^T delta_w|
};

struct NewtonStepInfo {
  double t = 0.0;
  int outer_index = 0;
  double decrement = 0.0;
  double kkt_residual = 0.0;
  double e_dot_dw = 0.0;
  double step_size = 0.0;
};
using StepObserver = std::function<void(const NewtonStepInfo&)>;

struct SolveDiagnostics {
  int outer_iterations = 0;
  double final_t = 0.0;
  long total_newton_steps = 0;
  bool subsampled = false;
  std::size_t reduced_size = 0;
};

struct MonotoneSolution {
  WeightVector weights;  // caller order
  SolveDiagnostics diagnostics;
};

/// Strictly feasible start w = e + delta v, v the mean-centered index ramp,
/// delta = 0.9 min((1-l)/|v_1|, (cap-1)/v_J).  Sums to J exactly.
std::vector<double> feasible_start(std::size_t j, double l, double u, double q);

/// Objective, gradient and tridiagonal Hessian of the centering problem
///   g(w) = -t sum f(w_i) - sum_{i=0..J} log(w_{i+1} - w_i)
/// with w_0 = l and w_{J+1} = cap.
CenteringDerivatives centering_derivatives(std::span<const double> w, double t, const MonotoneProblem& prob);

/// Barrier objective alone (used by the line search).  Returns +infinity on
/// infeasible points so callers can reject them uniformly.
double centering_objective(std::span<const double> w, double t, const MonotoneProblem& prob);

/// Solves the equality-constrained Newton KKT system
///   [H e; e^T 0] [dw; nu] = [-grad; 0]
/// by block elimination with two tridiagonal solves.
KktStep kkt_newton_step(const TridiagonalMatrix& hess, std::span<const double> grad);

/// lambda(w) = sqrt(dw^T H dw); lambda^2/2 bounds the centering
/// suboptimality for the damped Newton phase.
double newton_decrement(std::span<const double> delta_w, const TridiagonalMatrix& hess);

/// Backtracking line search: smallest k with s = ls_beta^k such that
/// w + s dw is strictly feasible and Armijo sufficient decrease holds.
double backtracking_search(std::span<const double> w, std::span<const double> delta_w, double t,
                           const MonotoneProblem& prob, double ls_alpha, double ls_beta);

/// Newton iterations at fixed t until lambda^2/2 < cfg.newton_tol.
std::vector<double> solve_centering(std::vector<double> w0, double t, const MonotoneProblem& prob,
                                    const BarrierConfig& cfg, int outer_index = 0, long* newton_steps = nullptr,
                                    const StepObserver& observer = nullptr);

/// Full barrier method.  Requires J <= cfg.subsample_limit; larger problems
/// go through subsample_solve.
MonotoneSolution solve_monotone(const MonotoneProblem& prob, const BarrierConfig& cfg = BarrierConfig{},
                                const StepObserver& observer = nullptr);

/// Barrier method behind the subsampling scheme: evenly spaced means,
/// dedup within c0, solve the reduced program, linear interpolation in mu,
/// rescale + clip + renormalize.  Delegates unchanged when J <= L.
MonotoneSolution subsample_solve(const MonotoneProblem& prob, const BarrierConfig& cfg = BarrierConfig{},
                                 const StepObserver& observer = nullptr);

/// sum_i roc_value(w_i, mu_i, q); accepts any nonnegative weights (the
/// zero vector included), not just solver-feasible ones.
double power_of_weights(std::span<const double> w, std::span<const double> mu, double q);

}  // namespace pweight::barrier
