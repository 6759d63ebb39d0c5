#pragma once

// Joint candidate distributions (explicit table or product of marginals),
// sampling, Bayes-rule preprocessing of volunteering rates, empirical
// estimation and the l1 / Bernstein confidence machinery used by the learner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "panelforge/domain.hpp"
#include "panelforge/rng.hpp"

namespace panelforge {

struct BadMarginal : Error {
  using Error::Error;
};
struct DegenerateInput : Error {
  using Error::Error;
};
struct NoSamples : Error {
  using Error::Error;
};

/// Bayes-rule preprocessing: P[x^i=j | volunteer] proportional to
/// P[volunteer | x^i=j] * P[x^i=j]. Returns the normalized elementwise product.
inline std::vector<double> bayes_adjust(const std::vector<double>& population_marginal,
                                        const std::vector<double>& volunteer_rates) {
  if (population_marginal.size() != volunteer_rates.size())
    throw BadMarginal("bayes_adjust: length mismatch");
  double pop_sum = 0.0;
  for (double v : population_marginal) {
    if (v < 0.0) throw BadMarginal("bayes_adjust: negative population entry");
    pop_sum += v;
  }
  if (std::abs(pop_sum - 1.0) > 1e-9)
    throw BadMarginal("bayes_adjust: population marginal does not sum to 1");
  std::vector<double> out(population_marginal.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (volunteer_rates[j] < 0.0) throw BadMarginal("bayes_adjust: negative rate");
    out[j] = population_marginal[j] * volunteer_rates[j];
    sum += out[j];
  }
  if (sum <= 0.0) throw DegenerateInput("bayes_adjust: product is identically zero");
  for (double& v : out) v /= sum;
  return out;
}

/// Normalizes a probability row loaded from external data. Rows off by at
/// most `tolerance` (published tables are often rounded to three decimals)
/// are renormalized with a warning; anything further off is a hard error.
inline std::vector<double> renormalized_row(std::vector<double> row, const std::string& label,
                                            std::ostream* warnings = nullptr,
                                            double tolerance = 5e-3) {
  double sum = 0.0;
  for (double v : row) {
    if (v < 0.0) throw BadMarginal(label + ": negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance)
    throw BadMarginal(label + ": sums to " + std::to_string(sum) +
                      ", beyond the renormalization tolerance");
  if (std::abs(sum - 1.0) > 1e-9) {
    if (warnings)
      *warnings << "warning: " << label << " sums to " << sum << "; renormalizing\n";
    for (double& v : row) v /= sum;
  }
  return row;
}

/// Dense probability table over the flat indices of a CandidateSpace.
class JointDistribution {
 public:
  JointDistribution(CandidateSpace space, std::vector<double> probabilities)
      : space_(std::move(space)), p_(std::move(probabilities)) {
    if (static_cast<std::int64_t>(p_.size()) != space_.cardinality())
      throw ShapeMismatch("JointDistribution: table size != |X|");
    double sum = 0.0;
    for (double v : p_) {
      if (v < 0.0 || v > 1.0) throw BadMarginal("JointDistribution: entry outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw BadMarginal("JointDistribution: probabilities sum to " + std::to_string(sum));
    cdf_.resize(p_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      acc += p_[i];
      cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
  }

  /// p(x) = prod_i marginal_i[x^i]. Each marginal must sum to 1 within 1e-9.
  static JointDistribution from_marginals(const CandidateSpace& space,
                                          const std::vector<std::vector<double>>& marginals) {
    if (static_cast<int>(marginals.size()) != space.feature_count())
      throw BadMarginal("from_marginals: feature count mismatch");
    for (std::size_t i = 0; i < marginals.size(); ++i) {
      if (static_cast<int>(marginals[i].size()) != space.domain_size(static_cast<int>(i)))
        throw BadMarginal("from_marginals: marginal length mismatch on feature " +
                          space.feature_label(i));
      double sum = 0.0;
      for (double v : marginals[i]) {
        if (v < 0.0)
          throw BadMarginal("from_marginals: negative entry on feature " +
                            space.feature_label(i));
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw BadMarginal("from_marginals: feature " + space.feature_label(i) +
                          " marginal sums to " + std::to_string(sum));
    }
    std::vector<double> p(space.cardinality());
    for (std::int64_t k = 0; k < space.cardinality(); ++k) {
      Candidate x = space.candidate_at(k);
      double v = 1.0;
      for (int i = 0; i < space.feature_count(); ++i) v *= marginals[i][x.values[i]];
      p[k] = v;
    }
    // Product of unit-sum factors sums to 1 up to roundoff; tidy it.
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
    return JointDistribution(space, std::move(p));
  }

  const CandidateSpace& space() const { return space_; }
  std::int64_t size() const { return static_cast<std::int64_t>(p_.size()); }
  double operator()(std::int64_t flat) const { return p_[flat]; }
  double prob(const Candidate& x) const { return p_[space_.flat_index(x)]; }
  const std::vector<double>& table() const { return p_; }

  std::vector<std::int64_t> support() const {
    std::vector<std::int64_t> s;
    for (std::size_t i = 0; i < p_.size(); ++i)
      if (p_[i] > 0.0) s.push_back(static_cast<std::int64_t>(i));
    return s;
  }

  bool strictly_positive() const {
    return std::all_of(p_.begin(), p_.end(), [](double v) { return v > 0.0; });
  }

  /// Marginal distribution of feature i.
  std::vector<double> marginal_of(int feature) const {
    std::vector<double> m(space_.domain_size(feature), 0.0);
    for (std::int64_t k = 0; k < size(); ++k)
      m[space_.candidate_at(k).values[feature]] += p_[k];
    return m;
  }

  std::int64_t sample_index(Rng& rng) const {
    const double u = rng.uniform01();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::int64_t>(it - cdf_.begin());
  }

  Candidate sample(Rng& rng) const { return space_.candidate_at(sample_index(rng)); }

 private:
  CandidateSpace space_;
  std::vector<double> p_;
  std::vector<double> cdf_;
};

/// Running counts n(x) over a candidate space.
class EmpiricalEstimate {
 public:
  explicit EmpiricalEstimate(std::int64_t space_size) : counts_(space_size, 0) {}

  void record(std::int64_t flat) {
    ++counts_[flat];
    ++total_;
  }

  std::int64_t total() const { return total_; }
  std::int64_t count(std::int64_t flat) const { return counts_[flat]; }
  const std::vector<std::int64_t>& counts() const { return counts_; }

  /// p_hat(x) = n(x)/total. Requires total >= 1.
  std::vector<double> empirical() const {
    if (total_ == 0) throw NoSamples("EmpiricalEstimate::empirical: no samples");
    std::vector<double> p(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i)
      p[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    return p;
  }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// l1-deviation radius (Weissman-style):
///   beta = sqrt( 2|X| log(6 |X| tau (tau-1) / delta) / (tau - 1) )
/// with tau - 1 := samples seen, so it is defined directly on the sample
/// count rather than on episode bookkeeping.
inline double l1_radius(const EmpiricalEstimate& estimate, double delta,
                        std::int64_t space_size) {
  const double t = static_cast<double>(estimate.total());
  if (estimate.total() == 0) throw NoSamples("l1_radius: no samples yet");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("l1_radius: delta outside (0,1)");
  const double s = static_cast<double>(space_size);
  return std::sqrt(2.0 * s * std::log(6.0 * s * (t + 1.0) * t / delta) / t);
}

struct BernsteinConstants {
  double b1 = std::sqrt(2.0);
  double b2 = 7.0 / 3.0;
};

/// Per-entry empirical-Bernstein intervals, clipped to [0,1]:
///   width(x) = B1 sqrt( sigma_hat^2(x) L / t ) + B2 L / t,
/// L = log(6 |X| tau / delta), tau = t + 1, sigma_hat^2 = p_hat (1 - p_hat).
/// The horizon hint is not part of the width; it only sanity-checks callers.
inline std::pair<std::vector<double>, std::vector<double>> bernstein_intervals(
    const EmpiricalEstimate& estimate, double delta, std::int64_t space_size,
    std::int64_t horizon_hint = 0, BernsteinConstants constants = {}) {
  if (estimate.total() == 0) throw NoSamples("bernstein_intervals: no samples yet");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("bernstein_intervals: delta outside (0,1)");
  if (horizon_hint < 0) throw Error("bernstein_intervals: negative horizon");
  const double t = std::max<double>(1.0, static_cast<double>(estimate.total()));
  const double s = static_cast<double>(space_size);
  const double log_term = std::log(6.0 * s * (t + 1.0) / delta);
  std::vector<double> lower(estimate.counts().size());
  std::vector<double> upper(estimate.counts().size());
  for (std::size_t x = 0; x < lower.size(); ++x) {
    const double p_hat =
        static_cast<double>(estimate.count(static_cast<std::int64_t>(x))) / t;
    const double var = p_hat * (1.0 - p_hat);
    const double width =
        constants.b1 * std::sqrt(var * log_term / t) + constants.b2 * log_term / t;
    lower[x] = std::max(0.0, p_hat - width);
    upper[x] = std::min(1.0, p_hat + width);
  }
  return {std::move(lower), std::move(upper)};
}

/// Confidence region around an empirical distribution: either an l1 ball of
/// radius `l1_radius` or a per-entry Bernstein box [lower, upper].
struct ConfidenceSet {
  enum class Kind { L1Ball, BernsteinBox };

  Kind kind = Kind::L1Ball;
  std::vector<double> center;  // p_hat
  double l1_radius = 0.0;      // L1Ball only
  std::vector<double> lower;   // BernsteinBox only
  std::vector<double> upper;
  double delta = 0.0;
  std::int64_t sample_count = 0;

  static ConfidenceSet l1(const EmpiricalEstimate& estimate, double delta,
                          std::int64_t space_size) {
    ConfidenceSet set;
    set.kind = Kind::L1Ball;
    set.center = estimate.empirical();
    set.l1_radius = panelforge::l1_radius(estimate, delta, space_size);
    set.delta = delta;
    set.sample_count = estimate.total();
    return set;
  }

  static ConfidenceSet bernstein(const EmpiricalEstimate& estimate, double delta,
                                 std::int64_t space_size, std::int64_t horizon_hint = 0,
                                 BernsteinConstants constants = {}) {
    ConfidenceSet set;
    set.kind = Kind::BernsteinBox;
    set.center = estimate.empirical();
    auto [lo, hi] = bernstein_intervals(estimate, delta, space_size, horizon_hint, constants);
    set.lower = std::move(lo);
    set.upper = std::move(hi);
    set.delta = delta;
    set.sample_count = estimate.total();
    return set;
  }

  bool contains(const std::vector<double>& q) const {
    if (q.size() != center.size()) return false;
    if (kind == Kind::L1Ball) {
      double dist = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) dist += std::abs(q[i] - center[i]);
      return dist <= l1_radius;
    }
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q[i] < lower[i] || q[i] > upper[i]) return false;
    return true;
  }
};

}  // namespace panelforge
