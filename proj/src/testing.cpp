#include "pweight/testing.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "pweight/numkit.hpp"

namespace pweight::testing {

double z_from_two_sided_p(double p0) {
  if (!(p0 > 0.0) || p0 > 1.0) {
    throw std::invalid_argument("z_from_two_sided_p: p must lie in (0, 1], got " + std::to_string(p0));
  }
  if (p0 == 1.0) return 0.0;
  return std_normal_quantile(0.5 * p0);
}

std::vector<double> rescale_effects(std::span<const double> t0, std::span<const double> n,
                                    std::span<const double> n0) {
  if (t0.size() != n.size() || t0.size() != n0.size()) {
    throw std::invalid_argument("rescale_effects: arrays must be aligned");
  }
  std::vector<double> mu(t0.size());
  for (std::size_t i = 0; i < t0.size(); ++i) {
    if (!(n[i] > 0.0) || !(n0[i] > 0.0)) {
      throw std::invalid_argument("rescale_effects: sample sizes must be positive at index " + std::to_string(i));
    }
    mu[i] = std::sqrt(n[i] / n0[i]) * t0[i];
  }
  return mu;
}

RejectionReport weighted_bonferroni(std::span<const double> p, const WeightVector& w, double q) {
  if (p.size() != w.w.size()) throw std::invalid_argument("weighted_bonferroni: dimension mismatch");
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("weighted_bonferroni: q must lie in (0,1)");
  RejectionReport r;
  r.q = q;
  r.alpha = q * static_cast<double>(p.size());
  r.rejected.resize(p.size());
  r.weighted_p.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double wi = w.w[i];
    if (wi > 0.0) {
      r.weighted_p[i] = p[i] / wi;
    } else {
      r.weighted_p[i] = p[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    const bool rej = p[i] <= q * wi;  // ties reject
    r.rejected[i] = rej ? 1 : 0;
    if (rej) ++r.hits;
  }
  return r;
}

std::size_t distinct_loci(const std::vector<std::string>& rejected_ids,
                          const std::unordered_map<std::string, std::string>& locus_by_id) {
  std::unordered_map<std::string, bool> seen;
  seen.reserve(rejected_ids.size());
  std::size_t count = 0;
  for (const auto& id : rejected_ids) {
    const auto it = locus_by_id.find(id);
    const std::string& key = it == locus_by_id.end() ? id : it->second;
    if (seen.emplace(key, true).second) ++count;
  }
  return count;
}

int score_method(std::size_t hits_method, std::size_t hits_unweighted) {
  if (hits_method > hits_unweighted) return +1;
  if (hits_method < hits_unweighted) return -1;
  return 0;
}

PairedStudy join_studies(std::span<const SummaryStatRecord> prior, std::span<const SummaryStatRecord> current) {
  std::unordered_map<std::string, std::size_t> current_by_id;
  current_by_id.reserve(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) {
    if (!current_by_id.emplace(current[i].id, i).second) {
      throw std::invalid_argument("join_studies: duplicate id '" + current[i].id + "' in current study");
    }
  }
  std::unordered_map<std::string, bool> seen_prior;
  seen_prior.reserve(prior.size());

  PairedStudy out;
  for (const auto& rec : prior) {
    if (!seen_prior.emplace(rec.id, true).second) {
      throw std::invalid_argument("join_studies: duplicate id '" + rec.id + "' in prior study");
    }
    const auto it = current_by_id.find(rec.id);
    if (it == current_by_id.end()) continue;
    const SummaryStatRecord& cur = current[it->second];
    if (!(rec.n > 0.0) || !(cur.n > 0.0)) {
      throw std::invalid_argument("join_studies: nonpositive sample size for id '" + rec.id + "'");
    }
    const double z = z_from_two_sided_p(rec.p_two_sided);
    if (z == 0.0) {
      // p0 == 1: no direction, cannot receive a one-sided weight.
      ++out.dropped_zero_effect;
      continue;
    }
    out.ids.push_back(rec.id);
    out.prior_z.push_back(z);
    out.mu_hat.push_back(std::sqrt(cur.n / rec.n) * z);
    if (!(cur.p_two_sided > 0.0) || cur.p_two_sided > 1.0) {
      throw std::invalid_argument("join_studies: current p outside (0,1] for id '" + rec.id + "'");
    }
    const bool same_direction = rec.sign * cur.sign > 0;
    out.current_p.push_back(same_direction ? 0.5 * cur.p_two_sided : 1.0 - 0.5 * cur.p_two_sided);
  }
  if (out.ids.empty()) {
    throw EmptyJoinError("join_studies: no shared ids with usable prior effects (dropped " +
                         std::to_string(out.dropped_zero_effect) + " with prior p = 1)");
  }
  return out;
}

}  // namespace pweight::testing
