#include "pweight/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pweight/barrier.hpp"
#include "pweight/kernels.hpp"
#include "pweight/rng.hpp"
#include "pweight/testing.hpp"
#include "pweight/tsv.hpp"
#include "pweight/version.hpp"
#include "pweight/weights.hpp"

namespace pweight::cli {

namespace {

using nlohmann::json;

double parse_bound(const std::string& text, const char* what) {
  std::string low = text;
  for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "inf" || low == "+inf" || low == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw CLI::ValidationError(std::string(what) + ": cannot parse '" + text + "'");
  }
}

struct SchemeFlags {
  std::string scheme;
  double q = 0.0;
  double l = 0.0;
  std::string u_text = "inf";
  double beta = 0.0;
  double cutoff = 0.0;
  bool has_beta = false;
  bool has_cutoff = false;
  bool has_l = false;
  bool has_u = false;
};

void require_scheme_flags(const SchemeFlags& f) {
  if (f.scheme == "monotone") {
    if (!f.has_l || !f.has_u) {
      throw CLI::ValidationError("--scheme monotone requires --l and --u");
    }
  } else if (f.scheme == "exponential") {
    if (!f.has_beta) throw CLI::ValidationError("--scheme exponential requires --beta");
  } else if (f.scheme == "filter") {
    if (!f.has_cutoff) throw CLI::ValidationError("--scheme filter requires --cutoff");
  }
}

/// Weights for a scheme given effect sizes (mu column) or, for filter,
/// prior p-values in the same column slot.
WeightVector scheme_weights(const SchemeFlags& f, const std::vector<double>& column,
                            barrier::SolveDiagnostics* diag_out) {
  if (f.scheme == "spjotvoll") {
    return spjotvoll_one_sided(EffectSizeVector::one_sided(column), f.q).weights;
  }
  if (f.scheme == "two-sided") {
    return spjotvoll_two_sided(EffectSizeVector::two_sided(column), f.q).weights;
  }
  if (f.scheme == "monotone") {
    const double u = parse_bound(f.u_text, "--u");
    const auto prob = barrier::MonotoneProblem::from_effects(EffectSizeVector::one_sided(column), f.q, f.l, u);
    auto sol = barrier::subsample_solve(prob);
    if (diag_out != nullptr) *diag_out = sol.diagnostics;
    return std::move(sol.weights);
  }
  if (f.scheme == "exponential") {
    return exponential_weights(EffectSizeVector::two_sided(column), f.beta);
  }
  if (f.scheme == "filter") {
    return filter_weights(column, f.cutoff);
  }
  throw CLI::ValidationError("unknown scheme '" + f.scheme + "'");
}

void write_manifest(const std::filesystem::path& out, const std::string& subcommand, const json& params,
                    const std::vector<std::filesystem::path>& inputs, std::optional<std::uint64_t> seed) {
  json m;
  m["tool"] = "pweight";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["parameters"] = params;
  m["kernels"] = kernels::active().name;
  json ins = json::array();
  for (const auto& p : inputs) {
    ins.push_back({{"path", p.string()}, {"fnv1a64", tsv::fnv1a_hex(p)}});
  }
  m["inputs"] = ins;
  if (seed.has_value()) {
    m["generator"] = CounterRng::kName;
    m["seed"] = *seed;
  }
  m["output"] = out.string();
  tsv::write_file_atomic(out.string() + ".manifest.json", m.dump(2) + "\n");
}

json scheme_params_json(const SchemeFlags& f) {
  json p;
  p["scheme"] = f.scheme;
  p["q"] = f.q;
  if (f.scheme == "monotone") {
    p["l"] = f.l;
    p["u"] = f.u_text;
  }
  if (f.has_beta) p["beta"] = f.beta;
  if (f.has_cutoff) p["cutoff"] = f.cutoff;
  return p;
}

void print_weight_summary(const WeightVector& wv, const SchemeFlags& f) {
  const auto [mn, mx] = std::minmax_element(wv.w.begin(), wv.w.end());
  double total = 0.0;
  for (double x : wv.w) total += x;
  const double j = static_cast<double>(wv.w.size());
  std::size_t at_lower = 0, at_upper = 0;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  if (f.scheme == "monotone") {
    lo = f.l;
    hi = std::min(parse_bound(f.u_text, "--u"), 1.0 / f.q);
  } else if (std::isfinite(wv.q)) {
    hi = (wv.sided == Sided::one) ? 1.0 / wv.q : 0.5 / wv.q;
  }
  // Reporting tolerance only; a default solve leaves ~gap/J of slack at
  // active bounds.
  for (double x : wv.w) {
    if (x <= lo + 1e-5 * std::max(1.0, lo)) ++at_lower;
    if (std::isfinite(hi) && x >= hi - 1e-5 * std::max(1.0, hi)) ++at_upper;
  }
  std::cout << "J=" << wv.w.size() << " sum=" << tsv::format_real(total) << " (target " << tsv::format_real(j)
            << ", rel err " << tsv::format_real(std::abs(total - j) / j) << ")\n"
            << "min=" << tsv::format_real(*mn) << " max=" << tsv::format_real(*mx) << " at-lower=" << at_lower
            << " at-upper=" << at_upper << "\n";
}

int cmd_weights(const SchemeFlags& flags, const std::string& in, const std::string& out) {
  const auto rows = tsv::read_effects(in);
  std::vector<double> column(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i].mu;

  barrier::SolveDiagnostics diag;
  const WeightVector wv = scheme_weights(flags, column, &diag);

  std::ostringstream body;
  body << "id\tweight\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    body << rows[i].id << '\t' << tsv::format_real(wv.w[i]) << '\n';
  }
  tsv::write_file_atomic(out, body.str());
  write_manifest(out, "weights", scheme_params_json(flags), {in}, std::nullopt);
  print_weight_summary(wv, flags);
  if (flags.scheme == "monotone" && diag.subsampled) {
    std::cout << "subsampled: reduced " << column.size() << " -> " << diag.reduced_size << " means\n";
  }
  return 0;
}

int cmd_test(const SchemeFlags& flags, const std::string& prior_path, const std::string& current_path,
             const std::string& out, double broadcast_n, double broadcast_n0, const std::string& loci_path) {
  const auto prior = tsv::read_summary_stats(prior_path, broadcast_n0);
  const auto current = tsv::read_summary_stats(current_path, broadcast_n);
  const testing::PairedStudy joined = testing::join_studies(prior, current);

  WeightVector wv;
  if (flags.scheme == "filter") {
    // Filtering keys on the prior two-sided p-values of the joined records.
    std::vector<double> prior_p(joined.prior_z.size());
    for (std::size_t i = 0; i < prior_p.size(); ++i) prior_p[i] = 2.0 * std_normal_cdf(joined.prior_z[i]);
    wv = scheme_weights(flags, prior_p, nullptr);
  } else {
    wv = scheme_weights(flags, joined.mu_hat, nullptr);
  }

  const auto report = testing::weighted_bonferroni(joined.current_p, wv, flags.q);
  WeightVector ones;
  ones.w.assign(joined.current_p.size(), 1.0);
  ones.q = flags.q;
  const auto unweighted = testing::weighted_bonferroni(joined.current_p, ones, flags.q);

  std::ostringstream body;
  body << "id\tp\tweight\tweighted_p\treject\n";
  for (std::size_t i = 0; i < joined.ids.size(); ++i) {
    body << joined.ids[i] << '\t' << tsv::format_real(joined.current_p[i]) << '\t' << tsv::format_real(wv.w[i])
         << '\t' << tsv::format_real(report.weighted_p[i]) << '\t' << int(report.rejected[i]) << '\n';
  }
  tsv::write_file_atomic(out, body.str());

  json params = scheme_params_json(flags);
  if (broadcast_n > 0.0) params["broadcast_n"] = broadcast_n;
  if (broadcast_n0 > 0.0) params["broadcast_n0"] = broadcast_n0;
  std::vector<std::filesystem::path> inputs = {prior_path, current_path};

  // Hit counting: per hypothesis, or collapsed to loci when a grouping file
  // is supplied (the plug-in point for LD pruning done elsewhere).
  std::size_t hits_method = report.hits;
  std::size_t hits_unweighted = unweighted.hits;
  if (!loci_path.empty()) {
    const auto locus_by_id = tsv::read_id_map(loci_path);
    std::vector<std::string> rej_m, rej_u;
    for (std::size_t i = 0; i < joined.ids.size(); ++i) {
      if (report.rejected[i]) rej_m.push_back(joined.ids[i]);
      if (unweighted.rejected[i]) rej_u.push_back(joined.ids[i]);
    }
    hits_method = testing::distinct_loci(rej_m, locus_by_id);
    hits_unweighted = testing::distinct_loci(rej_u, locus_by_id);
    params["loci"] = loci_path;
    inputs.push_back(loci_path);
  }
  write_manifest(out, "test", params, inputs, std::nullopt);

  std::cout << "J=" << joined.ids.size() << " (dropped " << joined.dropped_zero_effect
            << " with prior p = 1), alpha=" << tsv::format_real(report.alpha) << "\n"
            << (loci_path.empty() ? "hits=" : "loci_hits=") << hits_method << " unweighted=" << hits_unweighted
            << " score=" << testing::score_method(hits_method, hits_unweighted) << "\n";
  return 0;
}

int cmd_simulate(const std::string& experiment, std::uint64_t seed, const std::string& out) {
  const std::string table = run_experiment(experiment, seed);
  if (out.empty()) {
    std::cout << table;
  } else {
    tsv::write_file_atomic(out, table);
    write_manifest(out, "simulate", json{{"experiment", experiment}}, {}, seed);
  }
  return 0;
}

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{"Optimal p-value weights for weighted Bonferroni testing"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SchemeFlags flags;
  std::string in_path, out_path, prior_path, current_path, experiment, loci_path;
  double broadcast_n = 0.0, broadcast_n0 = 0.0;
  std::uint64_t seed = 0;

  const auto add_scheme_options = [&flags](CLI::App* cmd, bool q_required) {
    cmd->add_option("--scheme", flags.scheme, "spjotvoll | two-sided | monotone | exponential | filter")
        ->required()
        ->check(CLI::IsMember({"spjotvoll", "two-sided", "monotone", "exponential", "filter"}));
    auto* q = cmd->add_option("--q", flags.q, "per-test significance level (FWER alpha = J*q)");
    if (q_required) q->required();
    cmd->add_option("--l", flags.l, "monotone lower bound")->each([&flags](const std::string&) { flags.has_l = true; });
    cmd->add_option("--u", flags.u_text, "monotone upper bound (number or 'inf')")
        ->each([&flags](const std::string&) { flags.has_u = true; });
    cmd->add_option("--beta", flags.beta, "exponential weights rate")
        ->each([&flags](const std::string&) { flags.has_beta = true; });
    cmd->add_option("--cutoff", flags.cutoff, "filter prior p cutoff")
        ->each([&flags](const std::string&) { flags.has_cutoff = true; });
  };

  CLI::App* weights_cmd = app.add_subcommand("weights", "compute a weight vector from prior effect sizes");
  add_scheme_options(weights_cmd, true);
  weights_cmd->add_option("--in", in_path, "effects TSV: id<TAB>mu (filter: id<TAB>p)")->required();
  weights_cmd->add_option("--out", out_path, "output weights TSV: id<TAB>weight")->required();

  CLI::App* test_cmd = app.add_subcommand("test", "weighted testing of a current study against a prior study");
  add_scheme_options(test_cmd, true);
  test_cmd->add_option("--prior", prior_path, "prior summary stats TSV: id<TAB>p[<TAB>n[<TAB>sign]]")->required();
  test_cmd->add_option("--current", current_path, "current summary stats TSV")->required();
  test_cmd->add_option("--out", out_path, "rejection report TSV")->required();
  test_cmd->add_option("--broadcast-n", broadcast_n, "current-study sample size when the file has no n column");
  test_cmd->add_option("--broadcast-n0", broadcast_n0, "prior-study sample size when the file has no n column");
  test_cmd->add_option("--loci", loci_path, "id<TAB>locus grouping; hit counts collapse to distinct loci");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "reproduce the simulation experiments");
  sim_cmd
      ->add_option("--experiment", experiment,
                   "weight-shapes | power-loss | subsample-accuracy | spjot-vs-monotone | timing")
      ->required();
  sim_cmd->add_option("--seed", seed, "RNG seed (recorded in the manifest)");
  sim_cmd->add_option("--out", out_path, "output TSV (default stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("pweight");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (weights_cmd->parsed()) {
      require_scheme_flags(flags);
      return cmd_weights(flags, in_path, out_path);
    }
    if (test_cmd->parsed()) {
      require_scheme_flags(flags);
      return cmd_test(flags, prior_path, current_path, out_path, broadcast_n, broadcast_n0, loci_path);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(experiment, seed, out_path);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NoInteriorSolutionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const barrier::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const tsv::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace pweight::cli
