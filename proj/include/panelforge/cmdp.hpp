#pragma once

// Builders translating the committee-selection CMDP into LinearProgram
// instances, plus policy extraction from occupation measures.
//
// The transition kernel is the i.i.d. kernel P(x'|x,a) = p(x'), so the flow
// constraints collapse to mu(x,0) + mu(x,1) = p(x) and the whole CMDP is one
// LP over mu. Proportionality is imposed for j in [D_i - 1] only; the D_i-th
// constraint is linearly dependent and would just add numerical redundancy.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "panelforge/distribution.hpp"
#include "panelforge/domain.hpp"
#include "panelforge/lp.hpp"

namespace panelforge {

struct NotStrictlyPositive : Error {
  using Error::Error;
};

/// Accept probability per flat candidate index (action 1 = accept).
struct StationaryPolicy {
  std::vector<double> accept_prob;
  std::uint64_t space_fingerprint = 0;

  double operator()(std::int64_t flat) const { return accept_prob[flat]; }
};

/// Long-run state-action frequency mu(x,a), laid out as mu[2x + a].
struct OccupationMeasure {
  std::vector<double> mu;

  double operator()(std::int64_t flat, int action) const { return mu[2 * flat + action]; }
  double state_total(std::int64_t flat) const { return mu[2 * flat] + mu[2 * flat + 1]; }
  std::int64_t states() const { return static_cast<std::int64_t>(mu.size()) / 2; }
};

/// Selection rate g = sum_x p(x) pi(x) = P[a=1].
inline double gain(const StationaryPolicy& policy, const JointDistribution& p) {
  double g = 0.0;
  for (std::int64_t x = 0; x < p.size(); ++x) g += p(x) * policy.accept_prob[x];
  return g;
}

namespace detail {

/// Coefficients of the constraint <mu(.,1), xi_j^i> = 0 for each (i, j) with
/// j in [D_i - 1]: coef(x) = 1{x^i = j} - rho_j^i.
inline std::vector<std::vector<double>> representation_rows(const CandidateSpace& space,
                                                            const TargetProfile& target) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < space.feature_count(); ++i) {
    for (int j = 0; j + 1 < space.domain_size(i); ++j) {
      std::vector<double> row(space.cardinality());
      for (std::int64_t x = 0; x < space.cardinality(); ++x) {
        const int v = space.candidate_at(x).values[static_cast<std::size_t>(i)];
        row[x] = (v == j ? 1.0 : 0.0) - target.value(i, j);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace detail

/// Known-distribution CMDP as an LP over mu(x,a):
///   max sum_x mu(x,1)
///   s.t. mu >= 0, sum mu = 1, mu(x,0)+mu(x,1) = p(x),
///        sum_x mu(x,1) (1{x^i=j} - rho_j^i) = 0 for all i, j in [D_i - 1].
/// Requires strictly positive p (which guarantees feasibility) unless
/// allow_zero_cells is set, in which case infeasibility may surface from the
/// solver instead.
inline LinearProgram build_known_p_lp(const JointDistribution& p, const TargetProfile& target,
                                      bool allow_zero_cells = false) {
  if (!allow_zero_cells && !p.strictly_positive())
    throw NotStrictlyPositive("build_known_p_lp: p has a zero cell");
  const std::int64_t nx = p.size();
  const int n = static_cast<int>(2 * nx);
  LinearProgram lp;
  lp.objective.assign(n, 0.0);
  for (std::int64_t x = 0; x < nx; ++x) lp.objective[2 * x + 1] = 1.0;

  lp.eq_matrix.emplace_back(n, 1.0);
  lp.eq_rhs.push_back(1.0);
  for (std::int64_t x = 0; x < nx; ++x) {
    std::vector<double> row(n, 0.0);
    row[2 * x] = 1.0;
    row[2 * x + 1] = 1.0;
    lp.eq_matrix.push_back(std::move(row));
    lp.eq_rhs.push_back(p(x));
  }
  for (const auto& rep : detail::representation_rows(p.space(), target)) {
    std::vector<double> row(n, 0.0);
    for (std::int64_t x = 0; x < nx; ++x) row[2 * x + 1] = rep[x];
    lp.eq_matrix.push_back(std::move(row));
    lp.eq_rhs.push_back(0.0);
  }
  return lp;
}

/// pi(x) = mu(x,1) / (mu(x,0) + mu(x,1)); 1/2 where the state has no mass.
inline StationaryPolicy extract_policy(const OccupationMeasure& mu,
                                       const CandidateSpace& space) {
  StationaryPolicy pi;
  pi.space_fingerprint = space.fingerprint();
  pi.accept_prob.resize(mu.states());
  for (std::int64_t x = 0; x < mu.states(); ++x) {
    const double total = mu.state_total(x);
    if (total <= 1e-300) {
      pi.accept_prob[x] = 0.5;
    } else {
      const double v = mu(x, 1) / total;
      pi.accept_prob[x] = std::min(1.0, std::max(0.0, v));
    }
  }
  return pi;
}

/// Optimistic CMDP over an l1 confidence ball, as an extended LP with
/// per-state slack variables beta(x) linearizing the l1 constraint:
///   max sum mu(x,1)
///   s.t. mu, beta >= 0, sum mu = 1,
///        |mu(x,0)+mu(x,1) - p_hat(x)| <= beta(x),  sum_x beta(x) <= beta_l,
///        representation equalities on mu(.,1).
/// Coupling the beta budget to each mu(x,a) instead would collapse the set
/// whenever some mu(x,a) = 0; the plain l1-budget form keeps the beta_l = 0
/// reduction to the known-p LP exact.
inline LinearProgram build_extended_lp_l1(const ConfidenceSet& set, const CandidateSpace& space,
                                          const TargetProfile& target) {
  if (set.kind != ConfidenceSet::Kind::L1Ball)
    throw Error("build_extended_lp_l1: confidence set is not an l1 ball");
  const std::int64_t nx = static_cast<std::int64_t>(set.center.size());
  const int n = static_cast<int>(3 * nx);  // mu(x,0), mu(x,1) then beta(x)
  const auto beta0 = [&](std::int64_t x) { return static_cast<std::size_t>(2 * nx + x); };

  LinearProgram lp;
  lp.objective.assign(n, 0.0);
  for (std::int64_t x = 0; x < nx; ++x) lp.objective[2 * x + 1] = 1.0;

  std::vector<double> mass_row(n, 0.0);
  for (std::int64_t x = 0; x < nx; ++x) mass_row[2 * x] = mass_row[2 * x + 1] = 1.0;
  lp.eq_matrix.push_back(std::move(mass_row));
  lp.eq_rhs.push_back(1.0);
  for (const auto& rep : detail::representation_rows(space, target)) {
    std::vector<double> row(n, 0.0);
    for (std::int64_t x = 0; x < nx; ++x) row[2 * x + 1] = rep[x];
    lp.eq_matrix.push_back(std::move(row));
    lp.eq_rhs.push_back(0.0);
  }

  for (std::int64_t x = 0; x < nx; ++x) {
    std::vector<double> up(n, 0.0);
    up[2 * x] = up[2 * x + 1] = 1.0;
    up[beta0(x)] = -1.0;
    lp.ub_matrix.push_back(std::move(up));
    lp.ub_rhs.push_back(set.center[x]);

    std::vector<double> down(n, 0.0);
    down[2 * x] = down[2 * x + 1] = -1.0;
    down[beta0(x)] = -1.0;
    lp.ub_matrix.push_back(std::move(down));
    lp.ub_rhs.push_back(-set.center[x]);
  }
  std::vector<double> budget(n, 0.0);
  for (std::int64_t x = 0; x < nx; ++x) budget[beta0(x)] = 1.0;
  lp.ub_matrix.push_back(std::move(budget));
  lp.ub_rhs.push_back(set.l1_radius);
  return lp;
}

/// Optimistic CMDP over per-entry Bernstein intervals:
///   max sum mu(x,1)
///   s.t. mu >= 0, sum mu = 1, lower(x) <= mu(x,0)+mu(x,1) <= upper(x),
///        representation equalities on mu(.,1).
inline LinearProgram build_extended_lp_bernstein(const ConfidenceSet& set,
                                                 const CandidateSpace& space,
                                                 const TargetProfile& target) {
  if (set.kind != ConfidenceSet::Kind::BernsteinBox)
    throw Error("build_extended_lp_bernstein: confidence set is not a Bernstein box");
  const std::int64_t nx = static_cast<std::int64_t>(set.center.size());
  const int n = static_cast<int>(2 * nx);

  LinearProgram lp;
  lp.objective.assign(n, 0.0);
  for (std::int64_t x = 0; x < nx; ++x) lp.objective[2 * x + 1] = 1.0;

  lp.eq_matrix.emplace_back(n, 1.0);
  lp.eq_rhs.push_back(1.0);
  for (const auto& rep : detail::representation_rows(space, target)) {
    std::vector<double> row(n, 0.0);
    for (std::int64_t x = 0; x < nx; ++x) row[2 * x + 1] = rep[x];
    lp.eq_matrix.push_back(std::move(row));
    lp.eq_rhs.push_back(0.0);
  }
  for (std::int64_t x = 0; x < nx; ++x) {
    std::vector<double> up(n, 0.0);
    up[2 * x] = up[2 * x + 1] = 1.0;
    lp.ub_matrix.push_back(std::move(up));
    lp.ub_rhs.push_back(set.upper[x]);

    std::vector<double> down(n, 0.0);
    down[2 * x] = down[2 * x + 1] = -1.0;
    lp.ub_matrix.push_back(std::move(down));
    lp.ub_rhs.push_back(-set.lower[x]);
  }
  return lp;
}

/// Occupation measure from the leading 2|X| variables of an LP solution.
inline OccupationMeasure occupation_from_solution(const LpSolution& sol, std::int64_t states) {
  OccupationMeasure mu;
  mu.mu.assign(sol.values.begin(), sol.values.begin() + 2 * states);
  return mu;
}

struct CmdpSolution {
  StationaryPolicy policy;
  OccupationMeasure measure;
  double gain = 0.0;  // LP objective: optimal selection rate
};

/// Solve the known-p CMDP end to end.
inline CmdpSolution solve_known_p(const JointDistribution& p, const TargetProfile& target,
                                  const SimplexOptions& opts = {}) {
  const LinearProgram lp = build_known_p_lp(p, target);
  const LpSolution sol = solve(lp, opts);
  if (sol.status != LpStatus::Optimal)
    throw NumericalFailure(std::string("solve_known_p: LP is ") + to_string(sol.status));
  CmdpSolution out;
  out.measure = occupation_from_solution(sol, p.size());
  out.policy = extract_policy(out.measure, p.space());
  out.gain = sol.objective_value;
  return out;
}

// --- Policy JSON (flat index -> accept probability, plus space fingerprint
// --- so a policy cannot be silently replayed on a mismatched space).

inline nlohmann::json policy_to_json(const StationaryPolicy& policy) {
  return nlohmann::json{{"space_fingerprint", policy.space_fingerprint},
                        {"accept_prob", policy.accept_prob}};
}

inline StationaryPolicy policy_from_json(const nlohmann::json& j, const CandidateSpace& space) {
  StationaryPolicy policy;
  policy.space_fingerprint = j.at("space_fingerprint").get<std::uint64_t>();
  if (policy.space_fingerprint != space.fingerprint())
    throw ShapeMismatch("policy_from_json: space fingerprint mismatch");
  policy.accept_prob = j.at("accept_prob").get<std::vector<double>>();
  if (static_cast<std::int64_t>(policy.accept_prob.size()) != space.cardinality())
    throw ShapeMismatch("policy_from_json: accept_prob length mismatch");
  for (double v : policy.accept_prob)
    if (!(v >= 0.0 && v <= 1.0)) throw Error("policy_from_json: probability outside [0,1]");
  return policy;
}

}  // namespace panelforge
