#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "lp_fixtures.hpp"
#include "panelforge/lp.hpp"
#include "panelforge/rng.hpp"

using namespace panelforge;

TEST_CASE("fixture suite solves to known optima") {
  const auto suite = lp_fixtures::suite();
  REQUIRE(suite.size() == 30);
  for (const auto& fixture : suite) {
    INFO(fixture.name);
    const LpSolution sol = solve(fixture.lp);
    CHECK(sol.status == fixture.status);
    if (fixture.status == LpStatus::Optimal) {
      CHECK(sol.objective_value ==
            Catch::Approx(fixture.optimum).epsilon(1e-6).margin(1e-9));
      if (!std::isnan(fixture.dual_bound))
        CHECK(sol.objective_value <= fixture.dual_bound + 1e-9);
    }
  }
}

TEST_CASE("identical input gives identical output") {
  for (const auto& fixture : lp_fixtures::suite()) {
    const LpSolution a = solve(fixture.lp);
    const LpSolution b = solve(fixture.lp);
    CHECK(a.status == b.status);
    CHECK(a.objective_value == b.objective_value);  // bit-identical
    CHECK(a.values == b.values);
  }
}

TEST_CASE("feasible-by-construction problems are never Infeasible") {
  Rng rng(31337);
  for (int round = 0; round < 50; ++round) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const int m_ub = 1 + static_cast<int>(rng.below(4));
    const int m_eq = static_cast<int>(rng.below(3));
    std::vector<double> interior(n);
    for (double& v : interior) v = 0.1 + rng.uniform01();

    LinearProgram lp;
    lp.objective.resize(n);
    for (double& v : lp.objective) v = rng.uniform01() * 2.0 - 1.0;
    for (int r = 0; r < m_ub; ++r) {
      std::vector<double> row(n);
      double lhs = 0.0;
      for (int j = 0; j < n; ++j) {
        row[j] = rng.uniform01() * 2.0 - 1.0;
        lhs += row[j] * interior[j];
      }
      lp.ub_matrix.push_back(std::move(row));
      lp.ub_rhs.push_back(lhs + rng.uniform01());  // strict slack at the interior point
    }
    for (int r = 0; r < m_eq; ++r) {
      std::vector<double> row(n);
      double lhs = 0.0;
      for (int j = 0; j < n; ++j) {
        row[j] = rng.uniform01() * 2.0 - 1.0;
        lhs += row[j] * interior[j];
      }
      lp.eq_matrix.push_back(std::move(row));
      lp.eq_rhs.push_back(lhs);
    }
    const LpSolution sol = solve(lp);
    INFO("round " << round);
    CHECK(sol.status != LpStatus::Infeasible);
    if (sol.status == LpStatus::Optimal) {
      // The interior point is feasible, so the optimum cannot be below it.
      double at_interior = 0.0;
      for (int j = 0; j < n; ++j) at_interior += lp.objective[j] * interior[j];
      CHECK(sol.objective_value >= at_interior - 1e-7);
    }
  }
}

TEST_CASE("iteration caps surface as NumericalFailure instead of garbage") {
  LinearProgram lp = lp_fixtures::make({10, 6, 4}, {{1, 1, 1}, {10, 4, 5}, {2, 2, 6}},
                                       {100, 600, 300});
  SimplexOptions opts;
  opts.max_iterations = 1;
  CHECK_THROWS_AS(solve(lp, opts), NumericalFailure);
}

TEST_CASE("malformed models are rejected before solving") {
  LinearProgram lp;
  CHECK_THROWS_AS(solve(lp), Error);  // no variables
  lp.objective = {1.0, 2.0};
  lp.ub_matrix = {{1.0}};
  lp.ub_rhs = {1.0};
  CHECK_THROWS_AS(solve(lp), Error);  // row width mismatch
}

TEST_CASE("debug dump uses the fixed plain-text layout") {
  LinearProgram lp = lp_fixtures::make({3, 2}, {{1, 1}}, {4}, {{1, -1}}, {0});
  std::ostringstream os;
  lp.dump(os);
  const std::string text = os.str();
  CHECK(text.find("vars 2\n") != std::string::npos);
  CHECK(text.find("max 3 2\n") != std::string::npos);
  CHECK(text.find("eq 1 -1 = 0\n") != std::string::npos);
  CHECK(text.find("ub 1 1 <= 4\n") != std::string::npos);
  CHECK(text.find("bounds") != std::string::npos);
}
