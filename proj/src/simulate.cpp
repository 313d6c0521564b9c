#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include "pweight/barrier.hpp"
#include "pweight/cli.hpp"
#include "pweight/rng.hpp"
#include "pweight/tsv.hpp"
#include "pweight/weights.hpp"

namespace pweight::cli {

namespace {

using barrier::BarrierConfig;
using barrier::MonotoneProblem;

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PWEIGHT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Runs fn(0..n-1) across workers; each index writes its own result slot,
/// so the reduction is deterministic regardless of scheduling.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::min<std::size_t>(std::max(1u, threads), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> draw_neg_abs_normals(const CounterRng& rng, std::size_t j, std::uint64_t offset = 0) {
  std::vector<double> mu(j);
  for (std::size_t i = 0; i < j; ++i) mu[i] = -std::abs(rng.normal(offset + i));
  return mu;
}

std::string fmt(double x) { return tsv::format_real(x); }

std::string weight_shapes(std::uint64_t seed, unsigned threads) {
  const std::size_t j = 1000;
  const double q = 1e-7;
  const CounterRng rng(seed);
  const std::vector<double> mu = draw_neg_abs_normals(rng, j);
  const EffectSizeVector effects = EffectSizeVector::one_sided(mu);
  const auto order = effects.order_abs_ascending();

  struct Config {
    double l;
    double u;
  };
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<Config> grid = {{0.0, inf},  {0.25, inf}, {0.5, inf},  {0.75, inf},
                                    {0.0, 1.25}, {0.0, 1.5},  {0.0, 1.75}, {0.0, 2.0}};

  std::vector<std::vector<double>> solved(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t g) {
    const auto prob = MonotoneProblem::from_effects(effects, q, grid[g].l, grid[g].u);
    solved[g] = barrier::subsample_solve(prob).weights.w;
  });

  std::ostringstream out;
  out << "l\tu\trank\tmu\tweight\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t r = 0; r < j; ++r) {
      const std::size_t i = order[r];
      out << fmt(grid[g].l) << '\t' << fmt(grid[g].u) << '\t' << (r + 1) << '\t' << fmt(mu[i]) << '\t'
          << fmt(solved[g][i]) << '\n';
    }
  }
  return out.str();
}

std::string power_loss(std::uint64_t seed, unsigned threads) {
  const std::size_t j = 10000;
  const double q = 0.05 / static_cast<double>(j);
  const CounterRng rng(seed);
  const std::vector<double> mu = draw_neg_abs_normals(rng, j);
  const EffectSizeVector effects = EffectSizeVector::one_sided(mu);

  const std::vector<double> ones(j, 1.0);
  const double power_unweighted = barrier::power_of_weights(ones, mu, q);
  const auto spjot = spjotvoll_one_sided(effects, q);
  const double power_spjot = barrier::power_of_weights(spjot.weights.w, mu, q);

  const std::vector<double> lower = {1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1, 0.9};
  const std::vector<double> upper = {2.0, 10.0, std::numeric_limits<double>::infinity()};

  struct Cell {
    double l, u, power;
  };
  std::vector<Cell> cells(lower.size() * upper.size());
  parallel_for(cells.size(), threads, [&](std::size_t k) {
    const double l = lower[k % lower.size()];
    const double u = upper[k / lower.size()];
    const auto prob = MonotoneProblem::from_effects(effects, q, l, u);
    const auto sol = barrier::subsample_solve(prob);
    cells[k] = Cell{l, u, barrier::power_of_weights(sol.weights.w, mu, q)};
  });

  std::ostringstream out;
  out << "l\tu\tpower_monotone\tpower_unweighted\tpower_spjotvoll\n";
  for (const Cell& c : cells) {
    out << fmt(c.l) << '\t' << fmt(c.u) << '\t' << fmt(c.power) << '\t' << fmt(power_unweighted) << '\t'
        << fmt(power_spjot) << '\n';
  }
  return out.str();
}

std::string subsample_accuracy(std::uint64_t seed) {
  const std::size_t j = 20000;
  const double q = 5e-3;
  const CounterRng rng(seed);
  const std::vector<double> mu = draw_neg_abs_normals(rng, j);
  const EffectSizeVector effects = EffectSizeVector::one_sided(mu);
  const auto prob =
      MonotoneProblem::from_effects(effects, q, 0.0, std::numeric_limits<double>::infinity());

  BarrierConfig full_cfg;
  full_cfg.subsample_limit = j;  // direct solve as the reference
  const auto w_full = barrier::solve_monotone(prob, full_cfg).weights.w;
  const auto w_sub = barrier::subsample_solve(prob).weights.w;

  const auto order = effects.order_abs_ascending();
  std::ostringstream out;
  out << "rank\tmu\tw_full\tw_subsample\tabs_err\n";
  for (std::size_t r = 0; r < j; ++r) {
    const std::size_t i = order[r];
    out << (r + 1) << '\t' << fmt(mu[i]) << '\t' << fmt(w_full[i]) << '\t' << fmt(w_sub[i]) << '\t'
        << fmt(std::abs(w_full[i] - w_sub[i])) << '\n';
  }
  return out.str();
}

std::string spjot_vs_monotone(std::uint64_t seed) {
  const std::size_t j = 1000;
  const double q = 1e-7;
  const CounterRng rng(seed);
  const std::vector<double> mu = draw_neg_abs_normals(rng, j);
  const EffectSizeVector effects = EffectSizeVector::one_sided(mu);

  const auto spjot = spjotvoll_one_sided(effects, q);
  const auto prob =
      MonotoneProblem::from_effects(effects, q, 0.0, std::numeric_limits<double>::infinity());
  const auto mono = barrier::subsample_solve(prob).weights.w;

  const auto order = effects.order_abs_ascending();
  std::ostringstream out;
  out << "rank\tmu\tw_spjotvoll\tw_monotone\tabs_diff\n";
  for (std::size_t r = 0; r < j; ++r) {
    const std::size_t i = order[r];
    out << (r + 1) << '\t' << fmt(mu[i]) << '\t' << fmt(spjot.weights.w[i]) << '\t' << fmt(mono[i]) << '\t'
        << fmt(std::abs(spjot.weights.w[i] - mono[i])) << '\n';
  }
  return out.str();
}

std::string timing(std::uint64_t seed) {
  const std::vector<std::size_t> sizes = {100, 1000, 10000, 100000};
  const int trials = 50;
  const CounterRng master(seed);

  std::ostringstream out;
  out << "J\ttrials\tmean_seconds\tse2_seconds\tmedian_seconds\n";
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::size_t j = sizes[si];
    std::vector<double> secs(trials);
    for (int trial = 0; trial < trials; ++trial) {
      const CounterRng rng(master.raw(si * 1024 + static_cast<std::uint64_t>(trial)));
      const double q = rng.uniform01(0) / 10.0;
      const double l = rng.uniform01(1) / 10.0;
      const std::vector<double> mu = draw_neg_abs_normals(rng, j, 2);
      std::vector<double> sorted = mu;
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      const auto prob =
          MonotoneProblem::sorted(std::move(sorted), q, l, std::numeric_limits<double>::infinity());
      const auto start = std::chrono::steady_clock::now();
      const auto sol = barrier::subsample_solve(prob);
      const auto stop = std::chrono::steady_clock::now();
      (void)sol;
      secs[trial] = std::chrono::duration<double>(stop - start).count();
    }
    double mean = 0.0;
    for (double s : secs) mean += s;
    mean /= trials;
    double var = 0.0;
    for (double s : secs) var += (s - mean) * (s - mean);
    var /= (trials - 1);
    const double se2 = 2.0 * std::sqrt(var / trials);
    std::vector<double> sorted_secs = secs;
    std::sort(sorted_secs.begin(), sorted_secs.end());
    const double median = 0.5 * (sorted_secs[trials / 2 - 1] + sorted_secs[trials / 2]);
    out << j << '\t' << trials << '\t' << fmt(mean) << '\t' << fmt(se2) << '\t' << fmt(median) << '\n';
  }
  return out.str();
}

}  // namespace

std::string run_experiment(const std::string& name, std::uint64_t seed, unsigned threads) {
  const unsigned workers = resolve_threads(threads);
  if (name == "weight-shapes") return weight_shapes(seed, workers);
  if (name == "power-loss") return power_loss(seed, workers);
  if (name == "subsample-accuracy") return subsample_accuracy(seed);
  if (name == "spjot-vs-monotone") return spjot_vs_monotone(seed);
  if (name == "timing") return timing(seed);
  throw std::invalid_argument("unknown experiment '" + name +
                              "' (expected weight-shapes, power-loss, subsample-accuracy, "
                              "spjot-vs-monotone, or timing)");
}

}  // namespace pweight::cli
