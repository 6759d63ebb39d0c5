#pragma once

// Embedded 6-feature dataset for the UK Citizens' Assembly on Brexit
// recruitment scenario. Targets and volunteer-pool marginals are taken
// verbatim from the published assembly report (Renwick et al., "A Considered
// Public Voice on Brexit", 2017, pp. 28-32); the marginals are the
// volunteer-side probabilities obtained there via Bayes' rule from the
// per-group volunteering rates. Some published rows sum to 0.999 due to
// rounding and are renormalized on load.

#include <array>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "panelforge/distribution.hpp"
#include "panelforge/domain.hpp"

namespace panelforge::brexit {

struct FeatureRow {
  std::string name;
  std::vector<double> target;
  std::vector<double> marginal;
};

inline const std::vector<FeatureRow>& table() {
  static const std::vector<FeatureRow> rows = {
      {"ethnicity", {0.860, 0.140}, {0.863, 0.136}},
      {"social_class", {0.550, 0.450}, {0.556, 0.444}},
      {"age", {0.288, 0.344, 0.367}, {0.154, 0.432, 0.414}},
      {"region",
       {0.233, 0.160, 0.093, 0.134, 0.222, 0.047, 0.082, 0.028},
       {0.179, 0.155, 0.090, 0.117, 0.211, 0.073, 0.154, 0.021}},
      {"gender", {0.507, 0.493}, {0.384, 0.616}},
      {"brexit_vote", {0.481, 0.519}, {0.565, 0.434}},
  };
  return rows;
}

inline CandidateSpace space() {
  std::vector<int> sizes;
  std::vector<std::string> names;
  for (const auto& row : table()) {
    sizes.push_back(static_cast<int>(row.target.size()));
    names.push_back(row.name);
  }
  return CandidateSpace(std::move(sizes), std::move(names));
}

inline TargetProfile targets(std::ostream* warnings = nullptr) {
  std::vector<std::vector<double>> rho;
  for (const auto& row : table())
    rho.push_back(renormalized_row(row.target, row.name + " target", warnings));
  return TargetProfile(space(), std::move(rho));
}

inline std::vector<std::vector<double>> marginals(std::ostream* warnings = nullptr) {
  std::vector<std::vector<double>> out;
  for (const auto& row : table())
    out.push_back(renormalized_row(row.marginal, row.name + " marginal", warnings));
  return out;
}

/// Joint volunteer distribution, independence product of the marginals.
inline JointDistribution joint(std::ostream* warnings = nullptr) {
  return JointDistribution::from_marginals(space(), marginals(warnings));
}

/// Human-readable dump of targets vs marginals plus the derived constraint
/// count d~ (7 significant digits are enough for the 3-decimal source data).
inline void print_table(std::ostream& os) {
  os << "feature        targets / marginals\n";
  for (const auto& row : table()) {
    os << std::left << std::setw(14) << row.name << ' ';
    for (std::size_t j = 0; j < row.target.size(); ++j)
      os << (j ? "/" : "") << row.target[j];
    os << "  vs  ";
    for (std::size_t j = 0; j < row.marginal.size(); ++j)
      os << (j ? "/" : "") << row.marginal[j];
    os << '\n';
  }
  const TargetProfile rho = targets();
  os << "features: " << table().size() << ", |X| = " << space().cardinality()
     << ", d~ = " << rho.d_tilde() << '\n';
}

}  // namespace panelforge::brexit
