#pragma once

// Trial driver: streams candidates from p, applies a strategy, stops at K
// acceptances (or at a horizon), and records tau, representation loss and
// regret diagnostics. Trials are independent tasks keyed by seed; parallel
// and serial execution produce identical results because every trial derives
// its own RNG stream and aggregation folds records in seed order.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "panelforge/cmdp.hpp"
#include "panelforge/distribution.hpp"
#include "panelforge/domain.hpp"
#include "panelforge/rng.hpp"

namespace panelforge {

struct ZeroGain : Error {
  using Error::Error;
};

enum class TrialStatus { Completed, TimedOut };

inline const char* to_string(TrialStatus s) {
  return s == TrialStatus::Completed ? "Completed" : "TimedOut";
}

/// One audit row of the optional decision trace.
struct TraceRow {
  std::int64_t t = 0;
  std::int64_t candidate = 0;  // flat index
  int episode = 0;
  double accept_prob = 0.0;
  bool accepted = false;
};

struct TrialOptions {
  std::int64_t t_max = 10'000'000;  // safety valve; exceeding it yields TimedOut
  std::function<void(const TraceRow&)> trace;
};

inline const char* trace_csv_header() { return "t,candidate,episode,accept_prob,decision"; }

inline void write_trace_csv_row(std::ostream& os, const TraceRow& row) {
  os << row.t << ',' << row.candidate << ',' << row.episode << ',' << row.accept_prob << ','
     << (row.accepted ? 1 : 0) << '\n';
}

/// Outcome of one run-until-K trial.
struct TrialRecord {
  std::string strategy_id;
  std::uint64_t seed = 0;
  std::int64_t tau = 0;  // candidates screened, including the last accepted one
  std::int64_t accepted = 0;
  std::vector<std::int64_t> cell_counts;  // N_j^i at stop, flat cell layout
  std::vector<std::int64_t> member_indices;  // accepted candidates, flat, in order
  double loss = std::numeric_limits<double>::quiet_NaN();
  double loss_restricted = std::numeric_limits<double>::quiet_NaN();
  TrialStatus status = TrialStatus::Completed;
};

/// Streams candidates until K acceptances. Deterministic given (strategy
/// configuration, p, K, seed).
template <typename Strategy>
TrialRecord run_until_k(Strategy strategy, const JointDistribution& p,
                        const TargetProfile& target, std::int64_t committee_size,
                        std::uint64_t seed, const TrialOptions& options = {}) {
  if (committee_size < 1) throw Error("run_until_k: K must be >= 1");
  Rng rng(seed);
  Committee committee(p.space());
  TrialRecord record;
  record.strategy_id = strategy.id();
  record.seed = seed;

  std::int64_t t = 0;
  while (static_cast<std::int64_t>(committee.size()) < committee_size) {
    if (t >= options.t_max) {
      record.status = TrialStatus::TimedOut;
      break;
    }
    ++t;
    const Candidate x = p.sample(rng);
    const double prob = strategy.accept_probability(x);
    const bool accepted = strategy.step(x, rng);
    if (accepted) {
      committee.add(x);
      record.member_indices.push_back(p.space().flat_index(x));
    }
    if (options.trace)
      options.trace({t, p.space().flat_index(x), strategy.episode(), prob, accepted});
  }
  record.tau = t;
  record.accepted = static_cast<std::int64_t>(committee.size());
  record.cell_counts = committee.counts();
  if (committee.size() > 0) {
    const RepresentationProfile profile = representation_profile(committee);
    record.loss = representation_loss(profile, target);
    record.loss_restricted = representation_loss_restricted(profile, target);
  }
  return record;
}

struct RegretCheckpoint {
  std::int64_t t = 0;
  double regret = 0.0;       // R(t) = g* t - N(t)
  double rc = 0.0;           // max_{i,j} |N_j^i(t) - rho_j^i N(t)| over all cells
  double rc_restricted = 0.0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  std::int64_t accepted = 0;
};

/// Fixed-horizon run with exact regret bookkeeping; checkpoints at powers of
/// two keep memory bounded on long horizons.
struct RegretRecord {
  std::string strategy_id;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  double g_star = 0.0;
  std::int64_t accepted = 0;  // N(T)
  double regret = 0.0;        // R(T)
  double rc = 0.0;            // R^c(T)
  double rc_restricted = 0.0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  std::int64_t episodes = 0;
  std::vector<RegretCheckpoint> checkpoints;
};

namespace detail {

inline std::pair<double, double> constraint_costs(const CandidateSpace& space,
                                                  const TargetProfile& target,
                                                  const std::vector<std::int64_t>& cell_counts,
                                                  std::int64_t accepted) {
  double worst_all = 0.0, worst_restricted = 0.0;
  for (int i = 0; i < space.feature_count(); ++i) {
    for (int j = 0; j < space.domain_size(i); ++j) {
      const double dev = std::abs(static_cast<double>(cell_counts[space.cell_index(i, j)]) -
                                  target.value(i, j) * static_cast<double>(accepted));
      worst_all = std::max(worst_all, dev);
      if (j + 1 < space.domain_size(i)) worst_restricted = std::max(worst_restricted, dev);
    }
  }
  return {worst_all, worst_restricted};
}

}  // namespace detail

template <typename Strategy>
RegretRecord run_horizon(Strategy strategy, const JointDistribution& p,
                         const TargetProfile& target, std::int64_t horizon, double g_star,
                         std::uint64_t seed) {
  if (horizon < 1) throw Error("run_horizon: T must be >= 1");
  if (!(g_star >= 0.0 && g_star <= 1.0)) throw Error("run_horizon: g* outside [0,1]");
  Rng rng(seed);
  const CandidateSpace& space = p.space();
  Committee committee(space);

  RegretRecord record;
  record.strategy_id = strategy.id();
  record.seed = seed;
  record.horizon = horizon;
  record.g_star = g_star;

  std::int64_t next_checkpoint = 1;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const Candidate x = p.sample(rng);
    if (strategy.step(x, rng)) committee.add(x);
    if (t == next_checkpoint || t == horizon) {
      RegretCheckpoint cp;
      cp.t = t;
      cp.accepted = static_cast<std::int64_t>(committee.size());
      cp.regret = g_star * static_cast<double>(t) - static_cast<double>(cp.accepted);
      auto [rc, rcr] = detail::constraint_costs(space, target, committee.counts(), cp.accepted);
      cp.rc = rc;
      cp.rc_restricted = rcr;
      if (cp.accepted > 0)
        cp.loss = representation_loss(representation_profile(committee), target);
      if (record.checkpoints.empty() || record.checkpoints.back().t != t)
        record.checkpoints.push_back(cp);
      while (next_checkpoint <= t) next_checkpoint *= 2;
    }
  }
  const RegretCheckpoint& last = record.checkpoints.back();
  record.accepted = last.accepted;
  record.regret = last.regret;
  record.rc = last.rc;
  record.rc_restricted = last.rc_restricted;
  record.loss = last.loss;
  record.episodes = strategy.episode();
  return record;
}

/// E[tau] = K / g for any stationary policy: tau - K is the failure count of
/// a negative binomial with K successes and acceptance probability g.
inline double negative_binomial_tau_mean(double gain, std::int64_t committee_size) {
  return static_cast<double>(committee_size) / gain;
}
inline double negative_binomial_tau_variance(double gain, std::int64_t committee_size) {
  return static_cast<double>(committee_size) * (1.0 - gain) / (gain * gain);
}

struct TauSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::int64_t trials = 0;
};

/// Empirical mean/variance of tau for a stationary policy over n_trials
/// seeded runs.
inline TauSummary estimate_tau_distribution(const StationaryPolicy& policy,
                                            const JointDistribution& p,
                                            std::int64_t committee_size, std::int64_t n_trials,
                                            std::uint64_t base_seed) {
  if (gain(policy, p) <= 0.0) throw ZeroGain("estimate_tau_distribution: gain is zero");
  if (n_trials < 2) throw Error("estimate_tau_distribution: need at least 2 trials");
  std::vector<double> taus(n_trials);
  for (std::int64_t i = 0; i < n_trials; ++i) {
    Rng rng = Rng::stream(base_seed, static_cast<std::uint64_t>(i));
    std::int64_t accepted = 0, t = 0;
    while (accepted < committee_size) {
      ++t;
      const std::int64_t x = p.sample_index(rng);
      if (rng.bernoulli(policy.accept_prob[x])) ++accepted;
    }
    taus[i] = static_cast<double>(t);
  }
  TauSummary out;
  out.trials = n_trials;
  for (double v : taus) out.mean += v;
  out.mean /= static_cast<double>(n_trials);
  for (double v : taus) out.variance += (v - out.mean) * (v - out.mean);
  out.variance /= static_cast<double>(n_trials - 1);
  return out;
}

/// Thread cap: PANELFORGE_THREADS if set, else hardware concurrency.
inline int thread_cap() {
  if (const char* env = std::getenv("PANELFORGE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(index) for index in [0, n) on up to `threads` workers. Callers
/// store results by index, so the outcome is order-independent.
template <typename Fn>
void parallel_for_index(std::int64_t n, const Fn& fn, int threads = thread_cap()) {
  if (threads <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<std::int64_t>(threads, n));
  pool.reserve(count);
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// --- Record export (CSV column order is frozen; see README) ---

inline const char* trial_csv_header() {
  return "strategy,k,seed,tau,loss,status,loss_restricted,accepted";
}

inline void write_trial_csv_row(std::ostream& os, const TrialRecord& r, std::int64_t k) {
  os << r.strategy_id << ',' << k << ',' << r.seed << ',' << r.tau << ',' << r.loss << ','
     << to_string(r.status) << ',' << r.loss_restricted << ',' << r.accepted << '\n';
}

inline nlohmann::json trial_to_json(const TrialRecord& r, std::int64_t k) {
  return nlohmann::json{{"strategy", r.strategy_id},
                        {"k", k},
                        {"seed", r.seed},
                        {"tau", r.tau},
                        {"loss", r.loss},
                        {"status", to_string(r.status)},
                        {"loss_restricted", r.loss_restricted},
                        {"accepted", r.accepted},
                        {"cell_counts", r.cell_counts},
                        {"members", r.member_indices}};
}

inline const char* regret_csv_header() {
  return "strategy,seed,t,regret,rc,rc_restricted,loss,accepted,episodes";
}

inline void write_regret_csv_rows(std::ostream& os, const RegretRecord& r) {
  for (const auto& cp : r.checkpoints) {
    os << r.strategy_id << ',' << r.seed << ',' << cp.t << ',' << cp.regret << ',' << cp.rc << ','
       << cp.rc_restricted << ',' << cp.loss << ',' << cp.accepted << ',' << r.episodes << '\n';
  }
}

inline nlohmann::json regret_to_json(const RegretRecord& r) {
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& cp : r.checkpoints)
    cps.push_back({{"t", cp.t},
                   {"regret", cp.regret},
                   {"rc", cp.rc},
                   {"rc_restricted", cp.rc_restricted},
                   {"loss", cp.loss},
                   {"accepted", cp.accepted}});
  return nlohmann::json{{"strategy", r.strategy_id}, {"seed", r.seed},
                        {"horizon", r.horizon},     {"g_star", r.g_star},
                        {"regret", r.regret},       {"rc", r.rc},
                        {"rc_restricted", r.rc_restricted},
                        {"loss", r.loss},           {"accepted", r.accepted},
                        {"episodes", r.episodes},   {"checkpoints", cps}};
}

}  // namespace panelforge
