// panelforge: online selection of proportionally-representative committees.
//
//   panelforge run   --config cfg.json --strategy cmdp --k 200 --seed 7
//   panelforge sweep --config cfg.json --out sweep.csv
//   panelforge brexit-dataset

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "panelforge/panelforge.hpp"

namespace {

std::vector<std::int64_t> parse_k_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoll(item));
  }
  return out;
}

struct Flags {
  std::string config_path;
  std::string strategy;
  std::string k_text;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<std::int64_t> t_max;
  std::string out;
  std::string format;
  std::string trace;
};

void add_common_flags(CLI::App* cmd, Flags& flags, bool config_required) {
  auto* config = cmd->add_option("--config", flags.config_path, "experiment config (JSON)");
  if (config_required) config->required();
  cmd->add_option("--strategy", flags.strategy, "greedy | cmdp | rlcmdp | rlcmdp-b");
  cmd->add_option("--k", flags.k_text, "committee size(s), comma separated");
  cmd->add_option("--trials", flags.trials, "trials per (strategy, k)");
  cmd->add_option("--seed", flags.seed, "base seed");
  cmd->add_option("--epsilon", flags.epsilon, "greedy tolerance");
  cmd->add_option("--delta", flags.delta, "learner confidence");
  cmd->add_option("--t-max", flags.t_max, "per-trial step budget");
  cmd->add_option("--out", flags.out, "output file path");
  cmd->add_option("--format", flags.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
}

panelforge::ExperimentConfig apply_overrides(panelforge::ExperimentConfig cfg,
                                             const Flags& flags) {
  if (!flags.k_text.empty()) cfg.committee_sizes = parse_k_list(flags.k_text);
  if (flags.trials) cfg.trials = *flags.trials;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.t_max) cfg.t_max = *flags.t_max;
  if (!flags.out.empty()) cfg.out = flags.out;
  if (!flags.format.empty()) cfg.format = flags.format;
  if (!flags.strategy.empty()) {
    panelforge::StrategySpec spec;
    spec.name = flags.strategy;
    spec.epsilon = flags.epsilon;
    spec.delta = flags.delta;
    // Inherit missing parameters from a matching config entry.
    for (const auto& s : cfg.strategies) {
      if (s.name != spec.name) continue;
      if (!spec.epsilon) spec.epsilon = s.epsilon;
      if (!spec.delta) spec.delta = s.delta;
      break;
    }
    if (spec.name == "greedy" && !spec.epsilon)
      throw panelforge::ConfigError("strategy greedy requires --epsilon");
    if ((spec.name == "rlcmdp" || spec.name == "rlcmdp-b") && !spec.delta)
      throw panelforge::ConfigError("strategy " + spec.name + " requires --delta");
    cfg.strategies = {spec};
  } else {
    if (flags.epsilon || flags.delta)
      throw panelforge::ConfigError("--epsilon/--delta need --strategy");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online proportional-committee selection simulator"};
  app.require_subcommand(1);

  Flags run_flags, sweep_flags;
  CLI::App* run = app.add_subcommand("run", "run one trial and print the record");
  add_common_flags(run, run_flags, true);
  run->add_option("--trace", run_flags.trace, "write a per-decision audit CSV");
  CLI::App* sweep = app.add_subcommand("sweep", "aggregate trials over strategies and k");
  add_common_flags(sweep, sweep_flags, true);
  CLI::App* brexit = app.add_subcommand("brexit-dataset", "print the embedded dataset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (brexit->parsed()) return panelforge::cli::cmd_brexit_dataset(std::cout, std::cerr);
    if (run->parsed()) {
      panelforge::ExperimentConfig cfg =
          apply_overrides(panelforge::load_config(run_flags.config_path), run_flags);
      if (cfg.strategies.size() != 1)
        throw panelforge::ConfigError("run needs exactly one strategy (--strategy or config)");
      if (cfg.committee_sizes.size() != 1)
        throw panelforge::ConfigError("run needs exactly one k (--k or config)");
      return panelforge::cli::cmd_run(cfg, cfg.strategies[0], cfg.committee_sizes[0], cfg.seed,
                                      std::cout, std::cerr, run_flags.trace);
    }
    panelforge::ExperimentConfig cfg =
        apply_overrides(panelforge::load_config(sweep_flags.config_path), sweep_flags);
    return panelforge::cli::cmd_sweep(cfg, std::cout, std::cerr);
  } catch (const panelforge::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
