#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pweight/weights.hpp"

namespace pweight::testing {

struct EmptyJoinError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One hypothesis from a summary-statistics file: a two-sided p-value and a
/// per-record sample size.  `sign` is the direction of the underlying
/// effect estimate (+1/-1); files without a sign column default to +1,
/// which means "same direction as the prior" after the join.
struct SummaryStatRecord {
  std::string id;
  double p_two_sided = 1.0;
  double n = 0.0;
  int sign = +1;
};

/// Result of joining a prior and a current study on shared ids, in
/// prior-study order.  prior_z all strictly negative by the sign
/// convention; records whose prior p equals 1 (z = 0) are dropped and
/// counted, since one-sided weights cannot be assigned to them.
struct PairedStudy {
  std::vector<std::string> ids;
  std::vector<double> prior_z;   // T0, all < 0
  std::vector<double> mu_hat;    // sqrt(n/n0) * T0
  std::vector<double> current_p; // one-sided, replication direction
  std::size_t dropped_zero_effect = 0;
};

struct RejectionReport {
  std::vector<std::uint8_t> rejected;
  std::vector<double> weighted_p;  // Q_i = P_i / w_i; +inf when w_i = 0, P_i > 0
  double q = 0.0;
  double alpha = 0.0;  // family-wise level J*q
  std::size_t hits = 0;
};

/// Prior z-score from a two-sided prior p-value: Phi^{-1}(p0/2) <= 0, the
/// sign convention that makes the follow-up test one-sided in the prior
/// direction.  p0 = 1 maps to exactly 0.
double z_from_two_sided_p(double p0);

/// mu_i = sqrt(n_i / n0_i) * t0_i: transports a prior-study z-score to the
/// current study's sample size.
std::vector<double> rescale_effects(std::span<const double> t0, std::span<const double> n,
                                    std::span<const double> n0);

/// Weighted Bonferroni: reject i iff P_i <= q w_i (ties reject).
RejectionReport weighted_bonferroni(std::span<const double> p, const WeightVector& w, double q);

/// +1 / 0 / -1 as the method beats / ties / loses to unweighted testing.
int score_method(std::size_t hits_method, std::size_t hits_unweighted);

/// Inner join on id in prior order; converts prior p to z, rescales effects,
/// and derives the one-sided current p (p/2 on matching sign, 1 - p/2
/// otherwise).  Throws on duplicate ids or an empty intersection.
PairedStudy join_studies(std::span<const SummaryStatRecord> prior, std::span<const SummaryStatRecord> current);

/// Collapses rejected hypotheses to distinct loci before scoring: ids absent
/// from the grouping count as their own singleton locus.  LD pruning itself
/// is out of scope; the grouping file is the plug-in point for it.
std::size_t distinct_loci(const std::vector<std::string>& rejected_ids,
                          const std::unordered_map<std::string, std::string>& locus_by_id);

}  // namespace pweight::testing
