#pragma once

// The three online decision strategies as step-functions over an incoming
// candidate stream: quota Greedy, the stationary CMDP executor, and the
// optimistic RL-CMDP learner with episode doubling (l1 or Bernstein sets).

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "panelforge/cmdp.hpp"
#include "panelforge/distribution.hpp"
#include "panelforge/domain.hpp"
#include "panelforge/lp.hpp"
#include "panelforge/rng.hpp"

namespace panelforge {

/// Accepts a candidate as long as no per-cell quota would be exceeded:
///   N_j^i + 1{x^i=j} <= ceil(rho_j^i K) + eps K / (D_i - 1)  for all i,j.
/// The slack term stays real-valued, exactly as the acceptance inequality is
/// stated.
class GreedyPolicy {
 public:
  GreedyPolicy(const CandidateSpace& space, const TargetProfile& target, std::int64_t committee_size,
               double epsilon)
      : space_(space),
        k_(committee_size),
        epsilon_(epsilon),
        counts_(space.cell_count(), 0),
        quota_(space.cell_count(), 0.0) {
    if (committee_size < 1) throw Error("GreedyPolicy: K must be >= 1");
    if (epsilon < 0.0) throw Error("GreedyPolicy: epsilon must be >= 0");
    for (int i = 0; i < space.feature_count(); ++i) {
      const double slack = epsilon * static_cast<double>(k_) / (space.domain_size(i) - 1);
      for (int j = 0; j < space.domain_size(i); ++j)
        quota_[space.cell_index(i, j)] =
            std::ceil(target.value(i, j) * static_cast<double>(k_)) + slack;
    }
  }

  bool step(const Candidate& x, Rng&) {
    if (accepted_ >= k_) throw CommitteeFull("greedy_step: committee already has K members");
    // Only the d touched cells can newly violate; untouched cells keep their
    // previous count, which satisfied the quota by the class invariant.
    for (int i = 0; i < space_.feature_count(); ++i) {
      const std::int64_t cell = space_.cell_index(i, x.values[i]);
      if (static_cast<double>(counts_[cell] + 1) > quota_[cell]) return false;
    }
    for (int i = 0; i < space_.feature_count(); ++i) ++counts_[space_.cell_index(i, x.values[i])];
    ++accepted_;
#ifndef NDEBUG
    for (std::size_t c = 0; c < counts_.size(); ++c)
      assert(static_cast<double>(counts_[c]) <= quota_[c]);
#endif
    return true;
  }

  /// Probability the next step would accept x (0 or 1; Greedy is deterministic).
  double accept_probability(const Candidate& x) const {
    for (int i = 0; i < space_.feature_count(); ++i) {
      const std::int64_t cell = space_.cell_index(i, x.values[i]);
      if (static_cast<double>(counts_[cell] + 1) > quota_[cell]) return 0.0;
    }
    return 1.0;
  }

  int episode() const { return 0; }
  std::string id() const { return "greedy"; }
  std::int64_t accepted() const { return accepted_; }
  double quota(int feature, int value) const { return quota_[space_.cell_index(feature, value)]; }
  std::int64_t count(int feature, int value) const {
    return counts_[space_.cell_index(feature, value)];
  }
  double epsilon() const { return epsilon_; }

 private:
  CandidateSpace space_;
  std::int64_t k_;
  double epsilon_;
  std::int64_t accepted_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<double> quota_;
};

/// Plays a ~ pi(.|x): accept with probability accept_prob(x), independently
/// across calls.
class StationaryExecutor {
 public:
  StationaryExecutor(const CandidateSpace& space, StationaryPolicy policy)
      : space_(space), policy_(std::move(policy)) {
    if (static_cast<std::int64_t>(policy_.accept_prob.size()) != space.cardinality())
      throw ShapeMismatch("StationaryExecutor: policy length != |X|");
  }

  bool step(const Candidate& x, Rng& rng) {
    return rng.bernoulli(policy_.accept_prob[space_.flat_index(x)]);
  }

  double accept_probability(const Candidate& x) const {
    return policy_.accept_prob[space_.flat_index(x)];
  }

  int episode() const { return 0; }
  std::string id() const { return "cmdp"; }
  const StationaryPolicy& policy() const { return policy_; }

 private:
  CandidateSpace space_;
  StationaryPolicy policy_;
};

enum class LearnerVariant { L1, Bernstein };

struct LearnerOptions {
  LearnerVariant variant = LearnerVariant::L1;
  double delta = 0.1;
  std::int64_t horizon_hint = 0;  // Bernstein log terms use the learner clock
  BernsteinConstants bernstein;
  SimplexOptions simplex;
};

/// Optimistic learner: maintains counts n_t(x), and at each episode boundary
/// rebuilds the empirical distribution, its confidence set and the extended
/// LP, then freezes the extracted policy for the whole episode. An episode
/// ends at the first t with n_t(x_t) >= max(1, 2 n_snapshot(x_t)) - the UCRL
/// doubling convention, under which episode 1 is a single step. Before any
/// sample exists the policy is accept-all.
class CmdpLearner {
 public:
  CmdpLearner(const CandidateSpace& space, const TargetProfile& target, LearnerOptions options = {})
      : space_(space),
        target_(target),
        options_(options),
        estimate_(space.cardinality()),
        snapshot_(space.cardinality(), 0),
        policy_{std::vector<double>(space.cardinality(), 1.0), space.fingerprint()} {
    if (!(options_.delta > 0.0 && options_.delta < 1.0))
      throw Error("CmdpLearner: delta outside (0,1)");
  }

  bool step(const Candidate& x, Rng& rng) {
    if (boundary_pending_) start_episode();
    const std::int64_t flat = space_.flat_index(x);
    estimate_.record(flat);
    ++clock_;
    if (estimate_.count(flat) >= std::max<std::int64_t>(1, 2 * snapshot_[flat]))
      boundary_pending_ = true;
    return rng.bernoulli(policy_.accept_prob[flat]);
  }

  double accept_probability(const Candidate& x) const {
    return policy_.accept_prob[space_.flat_index(x)];
  }

  int episode() const { return episode_; }
  std::string id() const {
    return options_.variant == LearnerVariant::L1 ? "rlcmdp" : "rlcmdp-b";
  }
  std::int64_t episodes_started() const { return episode_; }
  std::int64_t episode_start() const { return episode_start_; }  // tau_l
  std::int64_t solver_fallbacks() const { return fallbacks_; }
  const StationaryPolicy& current_policy() const { return policy_; }
  std::int64_t samples_seen() const { return estimate_.total(); }

 private:
  void start_episode() {
    boundary_pending_ = false;
    ++episode_;
    episode_start_ = clock_ + 1;  // tau_l
    if (estimate_.total() > 0) {
      try {
        const ConfidenceSet set =
            options_.variant == LearnerVariant::L1
                ? ConfidenceSet::l1(estimate_, options_.delta, space_.cardinality())
                : ConfidenceSet::bernstein(estimate_, options_.delta, space_.cardinality(),
                                           options_.horizon_hint, options_.bernstein);
        const LinearProgram lp = options_.variant == LearnerVariant::L1
                                     ? build_extended_lp_l1(set, space_, target_)
                                     : build_extended_lp_bernstein(set, space_, target_);
        const LpSolution sol = panelforge::solve(lp, options_.simplex);
        if (sol.status == LpStatus::Optimal) {
          const OccupationMeasure mu = occupation_from_solution(sol, space_.cardinality());
          policy_ = extract_policy(mu, space_);
        } else {
          ++fallbacks_;  // keep the previous episode's policy
        }
      } catch (const NumericalFailure&) {
        ++fallbacks_;
      }
    }
    snapshot_ = estimate_.counts();
  }

  CandidateSpace space_;
  TargetProfile target_;
  LearnerOptions options_;
  EmpiricalEstimate estimate_;
  std::vector<std::int64_t> snapshot_;  // n_{tau_l - 1}
  StationaryPolicy policy_;
  std::int64_t clock_ = 0;  // t: candidates observed so far
  std::int64_t episode_ = 0;
  std::int64_t episode_start_ = 1;
  std::int64_t fallbacks_ = 0;
  bool boundary_pending_ = true;  // forces episode 1 setup on the first step
};

}  // namespace panelforge
