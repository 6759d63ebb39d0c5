#pragma once

// Minimal dense linear programming: model, two-phase primal simplex and a
// plain-text dump for external cross-checking. Problem sizes here are tiny
// (at most a few thousand columns), so a full dense tableau is the robust
// choice over sparse machinery or an external solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "panelforge/domain.hpp"

namespace panelforge {

struct NumericalFailure : Error {
  using Error::Error;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// max objective . v  subject to  eq_matrix v = eq_rhs, ub_matrix v <= ub_rhs,
/// var_lower <= v <= var_upper (upper optional, +inf by default).
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_matrix;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> ub_matrix;
  std::vector<double> ub_rhs;
  std::vector<double> var_lower;  // empty = all zero
  std::vector<double> var_upper;  // empty = all +inf

  int variable_count() const { return static_cast<int>(objective.size()); }

  void validate() const {
    const std::size_t n = objective.size();
    if (n == 0) throw Error("LinearProgram: no variables");
    auto check_finite = [](double v, const char* what) {
      if (!std::isfinite(v)) throw Error(std::string("LinearProgram: non-finite ") + what);
    };
    for (double v : objective) check_finite(v, "objective coefficient");
    if (eq_matrix.size() != eq_rhs.size()) throw Error("LinearProgram: eq row count mismatch");
    if (ub_matrix.size() != ub_rhs.size()) throw Error("LinearProgram: ub row count mismatch");
    for (const auto& row : eq_matrix) {
      if (row.size() != n) throw Error("LinearProgram: eq row width mismatch");
      for (double v : row) check_finite(v, "eq coefficient");
    }
    for (const auto& row : ub_matrix) {
      if (row.size() != n) throw Error("LinearProgram: ub row width mismatch");
      for (double v : row) check_finite(v, "ub coefficient");
    }
    for (double v : eq_rhs) check_finite(v, "eq rhs");
    for (double v : ub_rhs) check_finite(v, "ub rhs");
    if (!var_lower.empty() && var_lower.size() != n)
      throw Error("LinearProgram: var_lower length mismatch");
    if (!var_upper.empty() && var_upper.size() != n)
      throw Error("LinearProgram: var_upper length mismatch");
    for (double v : var_lower) check_finite(v, "lower bound");
    for (double v : var_upper)
      if (std::isnan(v) || v == -kInfinity) throw Error("LinearProgram: bad upper bound");
  }

  double lower(int j) const { return var_lower.empty() ? 0.0 : var_lower[j]; }
  double upper(int j) const { return var_upper.empty() ? kInfinity : var_upper[j]; }

  /// Fixed-format dump: objective row, then constraint rows.
  void dump(std::ostream& os) const {
    os << "vars " << variable_count() << "\n";
    os << "max";
    for (double c : objective) os << " " << c;
    os << "\n";
    for (std::size_t r = 0; r < eq_matrix.size(); ++r) {
      os << "eq";
      for (double v : eq_matrix[r]) os << " " << v;
      os << " = " << eq_rhs[r] << "\n";
    }
    for (std::size_t r = 0; r < ub_matrix.size(); ++r) {
      os << "ub";
      for (double v : ub_matrix[r]) os << " " << v;
      os << " <= " << ub_rhs[r] << "\n";
    }
    os << "bounds";
    for (int j = 0; j < variable_count(); ++j) os << " [" << lower(j) << "," << upper(j) << "]";
    os << "\n";
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> values;
  double objective_value = 0.0;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;  // eligibility threshold for pivot elements
  double feas_tol = 1e-7;   // phase-1 acceptance / post-solve feasibility
  std::int64_t max_iterations = 0;  // 0 = derived from problem size
};

namespace detail {

// Full-tableau primal simplex (minimization). Entering variable: most
// negative reduced cost, lowest index on ties; ratio-test ties broken by
// lowest basis index. Switches to Bland's least-index rule permanently once
// the objective stalls, which guarantees termination on degenerate problems.
class SimplexTableau {
 public:
  SimplexTableau(int rows, int cols)
      : m_(rows), n_(cols), a_(rows, std::vector<double>(cols, 0.0)), rhs_(rows, 0.0),
        cost_(cols, 0.0), basis_(rows, -1) {}

  std::vector<double>& row(int r) { return a_[r]; }
  double& rhs(int r) { return rhs_[r]; }
  double& cost(int j) { return cost_[j]; }
  int basis(int r) const { return basis_[r]; }
  void set_basis(int r, int j) { basis_[r] = j; }
  double value(int r) const { return rhs_[r]; }
  double cost_value() const { return cost_shift_; }
  int rows() const { return m_; }

  /// Price out the basic columns so reduced costs start consistent.
  void price_out() {
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      if (std::abs(cost_[j]) > 0.0) eliminate_from_cost(r, j);
    }
  }

  void pivot(int r, int c) {
    const double inv = 1.0 / a_[r][c];
    for (int j = 0; j < n_; ++j) a_[r][j] *= inv;
    rhs_[r] *= inv;
    a_[r][c] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = a_[i][c];
      if (f == 0.0) continue;
      for (int j = 0; j < n_; ++j) a_[i][j] -= f * a_[r][j];
      a_[i][c] = 0.0;
      rhs_[i] -= f * rhs_[r];
      if (rhs_[i] < 0.0 && rhs_[i] > -1e-12) rhs_[i] = 0.0;
    }
    eliminate_from_cost(r, c);
    basis_[r] = c;
  }

  /// Runs the simplex loop with `allowed(j)` gating candidate entering
  /// columns. Returns false when an unbounded ray is found.
  template <typename Allowed>
  bool iterate(const Allowed& allowed, const SimplexOptions& opts, std::int64_t max_iter,
               std::int64_t& iterations) {
    bool bland = false;
    double best = cost_shift_;
    std::int64_t since_progress = 0;
    const std::int64_t stall_limit = 64 + 2 * (m_ + n_);
    for (;;) {
      if (++iterations > max_iter)
        throw NumericalFailure("simplex: iteration limit reached without certifying a status");
      int enter = -1;
      if (!bland) {
        double most_negative = -opts.pivot_tol;
        for (int j = 0; j < n_; ++j) {
          if (!allowed(j)) continue;
          if (cost_[j] < most_negative) {
            most_negative = cost_[j];
            enter = j;
          }
        }
      } else {
        for (int j = 0; j < n_; ++j) {
          if (!allowed(j)) continue;
          if (cost_[j] < -opts.pivot_tol) {
            enter = j;
            break;
          }
        }
      }
      if (enter < 0) return true;  // optimal for this phase

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double coef = a_[r][enter];
        if (coef <= opts.pivot_tol) continue;
        const double ratio = rhs_[r] / coef;
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return false;  // unbounded direction

      pivot(leave, enter);

      // cost_shift_ holds -z for the minimized objective, so progress means
      // it strictly increases.
      if (cost_shift_ > best + 1e-12) {
        best = cost_shift_;
        since_progress = 0;
      } else if (!bland && ++since_progress > stall_limit) {
        bland = true;  // degeneracy: fall back to Bland's anti-cycling rule
      }
    }
  }

  void drop_row(int r) {
    a_.erase(a_.begin() + r);
    rhs_.erase(rhs_.begin() + r);
    basis_.erase(basis_.begin() + r);
    --m_;
  }

  double coef(int r, int c) const { return a_[r][c]; }

 private:
  void eliminate_from_cost(int r, int c) {
    const double f = cost_[c];
    if (f == 0.0) return;
    for (int j = 0; j < n_; ++j) cost_[j] -= f * a_[r][j];
    cost_[c] = 0.0;
    cost_shift_ -= f * rhs_[r];
  }

  int m_, n_;
  std::vector<std::vector<double>> a_;
  std::vector<double> rhs_;
  std::vector<double> cost_;
  double cost_shift_ = 0.0;  // minus the current objective value
  std::vector<int> basis_;
};

}  // namespace detail

/// Two-phase dense simplex. Optimal solutions are re-checked against every
/// constraint within feas_tol; an uncertified state throws NumericalFailure
/// rather than returning garbage.
inline LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts = {}) {
  lp.validate();
  const int n = lp.variable_count();

  // Shift variables to v = lb + y with y >= 0; finite upper bounds become
  // extra <= rows.
  std::vector<double> lb(n), shift_rhs_eq(lp.eq_rhs), shift_rhs_ub(lp.ub_rhs);
  for (int j = 0; j < n; ++j) {
    lb[j] = lp.lower(j);
    if (!std::isfinite(lb[j])) throw Error("solve: lower bounds must be finite");
    if (lp.upper(j) < lb[j]) return {LpStatus::Infeasible, {}, 0.0};
  }
  for (std::size_t r = 0; r < lp.eq_matrix.size(); ++r)
    for (int j = 0; j < n; ++j) shift_rhs_eq[r] -= lp.eq_matrix[r][j] * lb[j];
  for (std::size_t r = 0; r < lp.ub_matrix.size(); ++r)
    for (int j = 0; j < n; ++j) shift_rhs_ub[r] -= lp.ub_matrix[r][j] * lb[j];

  std::vector<int> bounded;  // variables with finite upper bound
  for (int j = 0; j < n; ++j)
    if (std::isfinite(lp.upper(j))) bounded.push_back(j);

  const int m_eq = static_cast<int>(lp.eq_matrix.size());
  const int m_ub = static_cast<int>(lp.ub_matrix.size()) + static_cast<int>(bounded.size());
  const int m = m_eq + m_ub;
  const int n_cols = n + m_ub + m;  // structural + slacks + artificials
  const int slack0 = n;
  const int art0 = n + m_ub;

  detail::SimplexTableau tab(m, n_cols);

  int r = 0;
  auto fill_row = [&](const std::vector<double>* coefs, int ub_var, double rhs, bool is_eq) {
    auto& row = tab.row(r);
    if (coefs)
      for (int j = 0; j < n; ++j) row[j] = (*coefs)[j];
    else
      row[ub_var] = 1.0;
    double sign = 1.0;
    if (rhs < 0.0) {
      sign = -1.0;
      for (int j = 0; j < n; ++j) row[j] = -row[j];
      rhs = -rhs;
    }
    if (!is_eq) row[slack0 + (r - m_eq)] = sign;
    row[art0 + r] = 1.0;
    tab.rhs(r) = rhs;
    tab.set_basis(r, art0 + r);
    ++r;
  };

  for (int i = 0; i < m_eq; ++i) fill_row(&lp.eq_matrix[i], -1, shift_rhs_eq[i], true);
  for (std::size_t i = 0; i < lp.ub_matrix.size(); ++i)
    fill_row(&lp.ub_matrix[i], -1, shift_rhs_ub[i], false);
  for (int bj : bounded) fill_row(nullptr, bj, lp.upper(bj) - lb[bj], false);

  std::int64_t max_iter = opts.max_iterations > 0
                              ? opts.max_iterations
                              : 20000 + 40ll * (static_cast<std::int64_t>(m) + n_cols);
  std::int64_t iterations = 0;

  // Phase 1: minimize the sum of artificials.
  for (int i = 0; i < m; ++i) tab.cost(art0 + i) = 1.0;
  tab.price_out();
  auto not_artificial = [&](int j) { return j < art0; };
  if (!tab.iterate(not_artificial, opts, max_iter, iterations))
    throw NumericalFailure("simplex: phase 1 reported unbounded");
  if (-tab.cost_value() > opts.feas_tol) return {LpStatus::Infeasible, {}, 0.0};

  // Drive leftover artificials out of the basis; rows that cannot be pivoted
  // are redundant constraints and get dropped.
  for (int row_i = tab.rows() - 1; row_i >= 0; --row_i) {
    if (tab.basis(row_i) < art0) continue;
    int col = -1;
    for (int j = 0; j < art0; ++j) {
      if (std::abs(tab.coef(row_i, j)) > opts.pivot_tol) {
        col = j;
        break;
      }
    }
    if (col >= 0)
      tab.pivot(row_i, col);
    else
      tab.drop_row(row_i);
  }

  // Phase 2 over the original objective (maximize c = minimize -c).
  detail::SimplexTableau tab2(tab.rows(), art0);
  for (int i = 0; i < tab.rows(); ++i) {
    for (int j = 0; j < art0; ++j) tab2.row(i)[j] = tab.coef(i, j);
    tab2.rhs(i) = tab.value(i);
    tab2.set_basis(i, tab.basis(i));
  }
  for (int j = 0; j < n; ++j) tab2.cost(j) = -lp.objective[j];
  tab2.price_out();
  auto all_allowed = [](int) { return true; };
  if (!tab2.iterate(all_allowed, opts, max_iter, iterations)) {
    return {LpStatus::Unbounded, {}, 0.0};
  }

  std::vector<double> y(art0, 0.0);
  for (int i = 0; i < tab2.rows(); ++i)
    if (tab2.basis(i) < art0) y[tab2.basis(i)] = tab2.value(i);

  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.values.resize(n);
  for (int j = 0; j < n; ++j) sol.values[j] = lb[j] + y[j];
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += lp.objective[j] * sol.values[j];
  sol.objective_value = obj;

  // Certify primal feasibility before handing the solution out.
  const double tol = opts.feas_tol;
  for (std::size_t i = 0; i < lp.eq_matrix.size(); ++i) {
    double lhs = 0.0;
    for (int j = 0; j < n; ++j) lhs += lp.eq_matrix[i][j] * sol.values[j];
    if (std::abs(lhs - lp.eq_rhs[i]) > tol * std::max(1.0, std::abs(lp.eq_rhs[i])))
      throw NumericalFailure("simplex: optimal point violates equality row " + std::to_string(i));
  }
  for (std::size_t i = 0; i < lp.ub_matrix.size(); ++i) {
    double lhs = 0.0;
    for (int j = 0; j < n; ++j) lhs += lp.ub_matrix[i][j] * sol.values[j];
    if (lhs - lp.ub_rhs[i] > tol * std::max(1.0, std::abs(lp.ub_rhs[i])))
      throw NumericalFailure("simplex: optimal point violates <= row " + std::to_string(i));
  }
  for (int j = 0; j < n; ++j) {
    if (sol.values[j] < lp.lower(j) - tol || sol.values[j] > lp.upper(j) + tol)
      throw NumericalFailure("simplex: optimal point violates bound on variable " +
                             std::to_string(j));
  }
  return sol;
}

}  // namespace panelforge
