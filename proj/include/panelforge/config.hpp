#pragma once

// Experiment configuration: JSON schema shared by the CLI subcommands, plus
// the CSV loader for explicit joint tables. Unknown keys are rejected and
// every strategy must carry its full parameter set, so a config that loads
// is a config that runs.

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "panelforge/brexit.hpp"
#include "panelforge/distribution.hpp"
#include "panelforge/domain.hpp"

namespace panelforge {

struct ConfigError : Error {
  using Error::Error;
};

struct FeatureSpec {
  std::string name;
  int size = 0;
  std::vector<double> target;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct StrategySpec {
  std::string name;  // greedy | cmdp | rlcmdp | rlcmdp-b
  std::optional<double> epsilon;  // greedy
  std::optional<double> delta;    // rlcmdp, rlcmdp-b

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

enum class DistributionSource { Marginals, JointCsv, EmbeddedBrexit };

struct DistributionSpec {
  DistributionSource source = DistributionSource::Marginals;
  std::vector<std::vector<double>> marginals;
  std::vector<std::vector<double>> volunteer_rates;
  bool bayes_adjust = false;
  std::string csv_path;

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

struct ExperimentConfig {
  std::vector<FeatureSpec> features;
  DistributionSpec distribution;
  std::vector<StrategySpec> strategies;
  std::vector<std::int64_t> committee_sizes;
  std::int64_t trials = 1;
  std::uint64_t seed = 1;
  std::int64_t t_max = 10'000'000;
  std::string out;
  std::string format = "csv";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  CandidateSpace space() const {
    std::vector<int> sizes;
    std::vector<std::string> names;
    for (const auto& f : features) {
      sizes.push_back(f.size);
      names.push_back(f.name);
    }
    return CandidateSpace(std::move(sizes), std::move(names));
  }

  TargetProfile targets(std::ostream* warnings = nullptr) const {
    const CandidateSpace sp = space();
    std::vector<std::vector<double>> rho;
    for (const auto& f : features)
      rho.push_back(renormalized_row(f.target, "target of feature " + f.name, warnings));
    return TargetProfile(sp, std::move(rho));
  }

  JointDistribution joint(std::ostream* warnings = nullptr) const;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

inline std::vector<std::vector<double>> parse_nested(const nlohmann::json& j,
                                                     const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of arrays");
  std::vector<std::vector<double>> out;
  for (const auto& row : j) {
    if (!row.is_array()) throw ConfigError(where + " must be an array of arrays");
    out.push_back(row.get<std::vector<double>>());
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"features", "distribution", "strategies", "k", "trials", "seed",
                               "t_max", "out", "format"},
                              "config");
  ExperimentConfig cfg;

  if (j.contains("distribution")) {
    const auto& d = j.at("distribution");
    detail::reject_unknown_keys(
        d, {"source", "marginals", "volunteer_rates", "bayes_adjust", "csv_path"},
        "distribution");
    const std::string source = d.value("source", "marginals");
    if (source == "marginals")
      cfg.distribution.source = DistributionSource::Marginals;
    else if (source == "joint-csv")
      cfg.distribution.source = DistributionSource::JointCsv;
    else if (source == "embedded:brexit")
      cfg.distribution.source = DistributionSource::EmbeddedBrexit;
    else
      throw ConfigError("distribution.source \"" + source + "\" is not one of "
                        "marginals | joint-csv | embedded:brexit");
    if (d.contains("marginals"))
      cfg.distribution.marginals = detail::parse_nested(d.at("marginals"), "distribution.marginals");
    if (d.contains("volunteer_rates"))
      cfg.distribution.volunteer_rates =
          detail::parse_nested(d.at("volunteer_rates"), "distribution.volunteer_rates");
    cfg.distribution.bayes_adjust = d.value("bayes_adjust", false);
    cfg.distribution.csv_path = d.value("csv_path", "");
  } else if (!j.contains("features")) {
    throw ConfigError("config needs \"features\" and/or \"distribution\"");
  }

  const bool embedded = cfg.distribution.source == DistributionSource::EmbeddedBrexit;
  if (j.contains("features")) {
    for (const auto& f : j.at("features")) {
      detail::reject_unknown_keys(f, {"name", "size", "target"}, "features[]");
      FeatureSpec spec;
      spec.name = f.value("name", "");
      if (!f.contains("size")) throw ConfigError("feature \"" + spec.name + "\" is missing size");
      spec.size = f.at("size").get<int>();
      if (!f.contains("target"))
        throw ConfigError("feature \"" + spec.name + "\" is missing target");
      spec.target = f.at("target").get<std::vector<double>>();
      if (static_cast<int>(spec.target.size()) != spec.size)
        throw ConfigError("feature \"" + spec.name + "\": target length != size");
      cfg.features.push_back(std::move(spec));
    }
  } else if (embedded) {
    for (const auto& row : brexit::table())
      cfg.features.push_back({row.name, static_cast<int>(row.target.size()), row.target});
  }

  switch (cfg.distribution.source) {
    case DistributionSource::Marginals:
      if (cfg.distribution.marginals.size() != cfg.features.size())
        throw ConfigError("distribution.marginals must list one row per feature");
      if (cfg.distribution.bayes_adjust &&
          cfg.distribution.volunteer_rates.size() != cfg.features.size())
        throw ConfigError("bayes_adjust requires one volunteer_rates row per feature");
      if (!cfg.distribution.bayes_adjust && !cfg.distribution.volunteer_rates.empty())
        throw ConfigError("volunteer_rates given but bayes_adjust is false");
      break;
    case DistributionSource::JointCsv:
      if (cfg.distribution.csv_path.empty())
        throw ConfigError("distribution.csv_path required for source joint-csv");
      break;
    case DistributionSource::EmbeddedBrexit: {
      if (!cfg.distribution.marginals.empty() || !cfg.distribution.volunteer_rates.empty() ||
          !cfg.distribution.csv_path.empty())
        throw ConfigError("embedded:brexit takes no marginals/rates/csv_path");
      const auto& rows = brexit::table();
      if (cfg.features.size() != rows.size())
        throw ConfigError("embedded:brexit expects 6 features when overriding targets");
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (static_cast<std::size_t>(cfg.features[i].size) != rows[i].target.size())
          throw ConfigError("feature \"" + cfg.features[i].name +
                            "\": size does not match the embedded dataset");
      break;
    }
  }

  if (j.contains("strategies")) {
    for (const auto& s : j.at("strategies")) {
      detail::reject_unknown_keys(s, {"name", "epsilon", "delta"}, "strategies[]");
      StrategySpec spec;
      spec.name = s.value("name", "");
      if (s.contains("epsilon")) spec.epsilon = s.at("epsilon").get<double>();
      if (s.contains("delta")) spec.delta = s.at("delta").get<double>();
      if (spec.name == "greedy") {
        if (!spec.epsilon) throw ConfigError("strategy greedy requires epsilon");
      } else if (spec.name == "rlcmdp" || spec.name == "rlcmdp-b") {
        if (!spec.delta) throw ConfigError("strategy " + spec.name + " requires delta");
      } else if (spec.name != "cmdp") {
        throw ConfigError("strategy \"" + spec.name + "\" is not one of "
                          "greedy | cmdp | rlcmdp | rlcmdp-b");
      }
      cfg.strategies.push_back(std::move(spec));
    }
  }

  if (j.contains("k")) cfg.committee_sizes = j.at("k").get<std::vector<std::int64_t>>();
  cfg.trials = j.value("trials", std::int64_t{1});
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.t_max = j.value("t_max", std::int64_t{10'000'000});
  cfg.out = j.value("out", "");
  cfg.format = j.value("format", "csv");
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("format must be csv or json");
  for (std::int64_t k : cfg.committee_sizes)
    if (k < 1) throw ConfigError("k values must be >= 1");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.t_max < 1) throw ConfigError("t_max must be >= 1");

  cfg.targets();  // validates shapes and simplex invariants up front
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : cfg.features)
    features.push_back({{"name", f.name}, {"size", f.size}, {"target", f.target}});

  nlohmann::json dist;
  switch (cfg.distribution.source) {
    case DistributionSource::Marginals: dist["source"] = "marginals"; break;
    case DistributionSource::JointCsv: dist["source"] = "joint-csv"; break;
    case DistributionSource::EmbeddedBrexit: dist["source"] = "embedded:brexit"; break;
  }
  if (!cfg.distribution.marginals.empty()) dist["marginals"] = cfg.distribution.marginals;
  if (!cfg.distribution.volunteer_rates.empty())
    dist["volunteer_rates"] = cfg.distribution.volunteer_rates;
  if (cfg.distribution.bayes_adjust) dist["bayes_adjust"] = true;
  if (!cfg.distribution.csv_path.empty()) dist["csv_path"] = cfg.distribution.csv_path;

  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : cfg.strategies) {
    nlohmann::json row{{"name", s.name}};
    if (s.epsilon) row["epsilon"] = *s.epsilon;
    if (s.delta) row["delta"] = *s.delta;
    strategies.push_back(std::move(row));
  }

  return nlohmann::json{{"features", features},
                        {"distribution", dist},
                        {"strategies", strategies},
                        {"k", cfg.committee_sizes},
                        {"trials", cfg.trials},
                        {"seed", cfg.seed},
                        {"t_max", cfg.t_max},
                        {"out", cfg.out},
                        {"format", cfg.format}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config error in " + path + ": " + e.what());
  }
}

/// Explicit joint table from CSV: one row per cell, d feature-value columns
/// (1-based, matching user-facing I/O) then the probability. Unlisted cells
/// carry probability zero; duplicates are an error. '#' starts a comment and
/// a non-numeric first row is treated as a header.
inline JointDistribution load_joint_csv(const std::string& path, const CandidateSpace& space,
                                        std::ostream* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open joint CSV " + path);
  std::vector<double> p(space.cardinality(), 0.0);
  std::vector<bool> seen(space.cardinality(), false);
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (first_data_line) {
      first_data_line = false;
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str()) continue;  // header row
    }
    if (fields.size() != static_cast<std::size_t>(space.feature_count()) + 1)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(space.feature_count()) + " values + probability");
    Candidate x;
    for (int i = 0; i < space.feature_count(); ++i) {
      const long v = std::strtol(fields[i].c_str(), nullptr, 10);
      if (v < 1 || v > space.domain_size(i))
        throw ConfigError(path + ":" + std::to_string(line_no) + ": value " +
                          std::to_string(v) + " outside [1," +
                          std::to_string(space.domain_size(i)) + "] for feature " +
                          space.feature_label(i));
      x.values.push_back(static_cast<int>(v) - 1);
    }
    const std::int64_t flat = space.flat_index(x);
    if (seen[flat])
      throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate cell");
    seen[flat] = true;
    p[flat] = std::strtod(fields.back().c_str(), nullptr);
    if (p[flat] < 0.0)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": negative probability");
  }
  p = renormalized_row(std::move(p), "joint table " + path, warnings);
  return JointDistribution(space, std::move(p));
}

inline JointDistribution ExperimentConfig::joint(std::ostream* warnings) const {
  switch (distribution.source) {
    case DistributionSource::EmbeddedBrexit:
      return brexit::joint(warnings);
    case DistributionSource::JointCsv:
      return load_joint_csv(distribution.csv_path, space(), warnings);
    case DistributionSource::Marginals: {
      const CandidateSpace sp = space();
      std::vector<std::vector<double>> m;
      for (std::size_t i = 0; i < distribution.marginals.size(); ++i) {
        auto row = renormalized_row(distribution.marginals[i],
                                    "marginal of feature " + sp.feature_label(i), warnings);
        if (distribution.bayes_adjust)
          row = bayes_adjust(row, distribution.volunteer_rates[i]);
        m.push_back(std::move(row));
      }
      return JointDistribution::from_marginals(sp, m);
    }
  }
  throw ConfigError("unreachable distribution source");
}

}  // namespace panelforge
