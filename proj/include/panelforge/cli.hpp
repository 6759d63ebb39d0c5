#pragma once

// Command-line front end: single trials, K-sweeps over strategies, and the
// embedded Brexit dataset dump. Subcommand logic lives here (not in main) so
// the test suite can drive it in-process.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "panelforge/config.hpp"
#include "panelforge/policies.hpp"
#include "panelforge/simulator.hpp"

namespace panelforge::cli {

inline std::string format_param(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

/// Display label used in CSV rows, e.g. "greedy:eps=0.05".
inline std::string strategy_label(const StrategySpec& s) {
  std::string label = s.name;
  if (s.epsilon) label += ":eps=" + format_param(*s.epsilon);
  if (s.delta) label += ":delta=" + format_param(*s.delta);
  return label;
}

/// Runs one trial of the given strategy. The cmdp policy is solved once by
/// the caller and shared across trials (it does not depend on K or seed).
inline TrialRecord run_strategy_trial(const StrategySpec& spec, const JointDistribution& p,
                                      const TargetProfile& target,
                                      const StationaryPolicy* cmdp_policy, std::int64_t k,
                                      std::uint64_t seed, const TrialOptions& options) {
  TrialRecord record;
  if (spec.name == "greedy") {
    record = run_until_k(GreedyPolicy(p.space(), target, k, *spec.epsilon), p, target, k, seed,
                         options);
  } else if (spec.name == "cmdp") {
    record = run_until_k(StationaryExecutor(p.space(), *cmdp_policy), p, target, k, seed, options);
  } else if (spec.name == "rlcmdp" || spec.name == "rlcmdp-b") {
    LearnerOptions lo;
    lo.variant = spec.name == "rlcmdp" ? LearnerVariant::L1 : LearnerVariant::Bernstein;
    lo.delta = *spec.delta;
    lo.horizon_hint = options.t_max;
    record = run_until_k(CmdpLearner(p.space(), target, lo), p, target, k, seed, options);
  } else {
    throw ConfigError("unknown strategy \"" + spec.name + "\"");
  }
  record.strategy_id = strategy_label(spec);
  return record;
}

inline bool needs_cmdp_policy(const std::vector<StrategySpec>& strategies) {
  for (const auto& s : strategies)
    if (s.name == "cmdp") return true;
  return false;
}

inline int cmd_run(const ExperimentConfig& cfg, const StrategySpec& spec, std::int64_t k,
                   std::uint64_t seed, std::ostream& out, std::ostream& err,
                   const std::string& trace_path = "") {
  const JointDistribution p = cfg.joint(&err);
  const TargetProfile target = cfg.targets(&err);
  std::optional<StationaryPolicy> policy;
  if (spec.name == "cmdp") policy = solve_known_p(p, target).policy;

  TrialOptions options;
  options.t_max = cfg.t_max;
  std::ofstream trace_file;
  if (!trace_path.empty()) {
    trace_file.open(trace_path);
    if (!trace_file) {
      err << "error: cannot write trace file " << trace_path << '\n';
      return 1;
    }
    trace_file << trace_csv_header() << '\n';
    options.trace = [&trace_file](const TraceRow& row) { write_trace_csv_row(trace_file, row); };
  }
  const TrialRecord record =
      run_strategy_trial(spec, p, target, policy ? &*policy : nullptr, k, seed, options);

  std::ostringstream body;
  if (cfg.format == "json") {
    body << trial_to_json(record, k).dump(2) << '\n';
  } else {
    body << trial_csv_header() << '\n';
    write_trial_csv_row(body, record, k);
  }
  out << body.str();
  if (!cfg.out.empty()) {
    std::ofstream file(cfg.out);
    if (!file) {
      err << "error: cannot write " << cfg.out << '\n';
      return 1;
    }
    file << body.str();
  }
  return record.status == TrialStatus::TimedOut ? 2 : 0;
}

struct SweepRow {
  std::string strategy;
  std::int64_t k = 0;
  double mean_tau = 0.0;   // over completed trials
  double mean_loss = 0.0;  // over completed trials
  double timed_out_fraction = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Deterministic fold of trial records into one aggregate row per
/// (strategy, K), in the (strategy order, K order) of the config.
inline std::vector<SweepRow> aggregate_sweep(
    const ExperimentConfig& cfg,
    const std::map<std::pair<std::string, std::int64_t>, std::vector<TrialRecord>>& by_cell) {
  std::vector<SweepRow> rows;
  for (const auto& spec : cfg.strategies) {
    for (std::int64_t k : cfg.committee_sizes) {
      const auto it = by_cell.find({strategy_label(spec), k});
      if (it == by_cell.end()) continue;
      SweepRow row;
      row.strategy = strategy_label(spec);
      row.k = k;
      std::int64_t completed = 0, timed_out = 0;
      for (const auto& rec : it->second) {
        if (rec.status == TrialStatus::Completed) {
          ++completed;
          row.mean_tau += static_cast<double>(rec.tau);
          row.mean_loss += rec.loss;
        } else {
          ++timed_out;
        }
      }
      if (completed > 0) {
        row.mean_tau /= static_cast<double>(completed);
        row.mean_loss /= static_cast<double>(completed);
      }
      row.timed_out_fraction = static_cast<double>(timed_out) /
                               static_cast<double>(it->second.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline const char* sweep_csv_header() {
  return "strategy,k,mean_tau,mean_loss,timed_out_fraction";
}

/// Runs trials for every (strategy, K, seed) cell. Trials execute in
/// parallel (capped by PANELFORGE_THREADS) but records are folded in seed
/// order, so the output is independent of scheduling.
inline std::map<std::pair<std::string, std::int64_t>, std::vector<TrialRecord>> run_sweep_trials(
    const ExperimentConfig& cfg, const JointDistribution& p, const TargetProfile& target,
    std::ostream& err) {
  std::optional<StationaryPolicy> policy;
  if (needs_cmdp_policy(cfg.strategies)) policy = solve_known_p(p, target).policy;

  struct Task {
    const StrategySpec* spec;
    std::int64_t k;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& spec : cfg.strategies)
    for (std::int64_t k : cfg.committee_sizes)
      for (std::int64_t i = 0; i < cfg.trials; ++i)
        tasks.push_back({&spec, k, cfg.seed + static_cast<std::uint64_t>(i)});

  std::vector<TrialRecord> records(tasks.size());
  std::vector<std::string> failures(tasks.size());
  TrialOptions options;
  options.t_max = cfg.t_max;
  parallel_for_index(static_cast<std::int64_t>(tasks.size()), [&](std::int64_t i) {
    const Task& task = tasks[i];
    try {
      records[i] = run_strategy_trial(*task.spec, p, target, policy ? &*policy : nullptr, task.k,
                                      task.seed, options);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  std::map<std::pair<std::string, std::int64_t>, std::vector<TrialRecord>> by_cell;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!failures[i].empty()) {
      err << "error: trial (strategy=" << strategy_label(*tasks[i].spec) << ", k=" << tasks[i].k
          << ", seed=" << tasks[i].seed << ") failed: " << failures[i] << '\n';
      continue;  // individually recorded; the sweep carries on
    }
    by_cell[{strategy_label(*tasks[i].spec), tasks[i].k}].push_back(records[i]);
  }
  return by_cell;
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.strategies.empty()) {
    err << "error: sweep needs at least one strategy\n";
    return 1;
  }
  if (cfg.committee_sizes.empty()) {
    err << "error: sweep needs at least one k\n";
    return 1;
  }
  const JointDistribution p = cfg.joint(&err);
  const TargetProfile target = cfg.targets(&err);
  const auto by_cell = run_sweep_trials(cfg, p, target, err);
  const std::vector<SweepRow> rows = aggregate_sweep(cfg, by_cell);

  std::ostringstream body;
  if (cfg.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"strategy", r.strategy},
                     {"k", r.k},
                     {"mean_tau", r.mean_tau},
                     {"mean_loss", r.mean_loss},
                     {"timed_out_fraction", r.timed_out_fraction}});
    body << arr.dump(2) << '\n';
  } else {
    body << sweep_csv_header() << '\n';
    for (const auto& r : rows)
      body << r.strategy << ',' << r.k << ',' << r.mean_tau << ',' << r.mean_loss << ','
           << r.timed_out_fraction << '\n';
  }
  out << body.str();

  if (!cfg.out.empty()) {
    std::ofstream file(cfg.out);
    if (!file) {
      err << "error: cannot write " << cfg.out << '\n';
      return 1;
    }
    file << body.str();
    // Raw per-trial rows next to the aggregate, for recomputation/diffing.
    std::ofstream raw(cfg.out + ".trials.csv");
    raw << trial_csv_header() << '\n';
    for (const auto& spec : cfg.strategies)
      for (std::int64_t k : cfg.committee_sizes) {
        const auto it = by_cell.find({strategy_label(spec), k});
        if (it == by_cell.end()) continue;
        for (const auto& rec : it->second) write_trial_csv_row(raw, rec, k);
      }
  }
  return 0;
}

inline int cmd_brexit_dataset(std::ostream& out, std::ostream& err) {
  brexit::targets(&err);  // surfaces the renormalization warnings
  brexit::marginals(&err);
  brexit::print_table(out);
  return 0;
}

}  // namespace panelforge::cli
