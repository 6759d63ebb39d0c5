#pragma once

// Core combinatorial types for multi-attribute committee selection:
// candidate space, candidates, target profiles, committees, representation
// profiles and the l-infinity representation loss.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace panelforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCommittee : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct BadTarget : Error {
  using Error::Error;
};
struct CommitteeFull : Error {
  using Error::Error;
};

/// A candidate's feature values, 0-based internally (1-based in user I/O).
struct Candidate {
  std::vector<int> values;

  friend bool operator==(const Candidate& a, const Candidate& b) = default;
};

/// Product space of d finite feature domains. Candidates map bijectively to
/// flat indices in [0, cardinality()) via mixed-radix (row-major) encoding.
class CandidateSpace {
 public:
  explicit CandidateSpace(std::vector<int> domain_sizes,
                          std::vector<std::string> feature_names = {})
      : sizes_(std::move(domain_sizes)), names_(std::move(feature_names)) {
    if (sizes_.empty()) throw Error("CandidateSpace: need at least one feature");
    if (!names_.empty() && names_.size() != sizes_.size())
      throw Error("CandidateSpace: feature_names length mismatch");
    std::int64_t card = 1;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (sizes_[i] < 2)
        throw Error("CandidateSpace: domain size of feature " + feature_label(i) +
                    " must be >= 2");
      card *= sizes_[i];
      if (card > (std::int64_t{1} << 31))
        throw Error("CandidateSpace: cardinality exceeds 2^31");
    }
    cardinality_ = card;
    offsets_.resize(sizes_.size());
    std::int64_t off = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      offsets_[i] = off;
      off += sizes_[i];
    }
    cell_count_ = off;
  }

  int feature_count() const { return static_cast<int>(sizes_.size()); }
  int domain_size(int feature) const { return sizes_[feature]; }
  const std::vector<int>& domain_sizes() const { return sizes_; }
  std::int64_t cardinality() const { return cardinality_; }

  /// Number of (feature, value) cells, sum of D_i.
  std::int64_t cell_count() const { return cell_count_; }
  /// Flat cell index of (feature i, value j).
  std::int64_t cell_index(int feature, int value) const {
    return offsets_[feature] + value;
  }

  std::string feature_label(std::size_t i) const {
    if (i < names_.size() && !names_[i].empty()) return names_[i];
    return "#" + std::to_string(i);
  }
  const std::vector<std::string>& feature_names() const { return names_; }

  bool contains(const Candidate& x) const {
    if (x.values.size() != sizes_.size()) return false;
    for (std::size_t i = 0; i < sizes_.size(); ++i)
      if (x.values[i] < 0 || x.values[i] >= sizes_[i]) return false;
    return true;
  }

  std::int64_t flat_index(const Candidate& x) const {
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) idx = idx * sizes_[i] + x.values[i];
    return idx;
  }

  Candidate candidate_at(std::int64_t index) const {
    Candidate x;
    x.values.resize(sizes_.size());
    for (std::size_t i = sizes_.size(); i-- > 0;) {
      x.values[i] = static_cast<int>(index % sizes_[i]);
      index /= sizes_[i];
    }
    return x;
  }

  bool same_shape(const CandidateSpace& other) const { return sizes_ == other.sizes_; }

  /// FNV-1a over the domain sizes; used to detect space mismatch when
  /// deserializing policies.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    for (int s : sizes_) {
      h ^= static_cast<std::uint64_t>(s);
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  std::vector<int> sizes_;
  std::vector<std::string> names_;
  std::vector<std::int64_t> offsets_;
  std::int64_t cardinality_ = 0;
  std::int64_t cell_count_ = 0;
};

/// Per-feature target vectors rho^i in (0,1)^{D_i}, each summing to 1.
class TargetProfile {
 public:
  TargetProfile(const CandidateSpace& space, std::vector<std::vector<double>> rho)
      : rho_(std::move(rho)) {
    if (static_cast<int>(rho_.size()) != space.feature_count())
      throw ShapeMismatch("TargetProfile: feature count mismatch");
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      if (static_cast<int>(rho_[i].size()) != space.domain_size(static_cast<int>(i)))
        throw ShapeMismatch("TargetProfile: domain size mismatch for feature " +
                            space.feature_label(i));
      double sum = 0.0;
      for (double v : rho_[i]) {
        if (!(v > 0.0 && v < 1.0))
          throw BadTarget("TargetProfile: entry of feature " + space.feature_label(i) +
                          " not strictly inside (0,1)");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw BadTarget("TargetProfile: feature " + space.feature_label(i) +
                        " target sums to " + std::to_string(sum) + ", expected 1");
    }
  }

  int feature_count() const { return static_cast<int>(rho_.size()); }
  const std::vector<double>& feature(int i) const { return rho_[i]; }
  double value(int feature, int j) const { return rho_[feature][j]; }
  const std::vector<std::vector<double>>& vectors() const { return rho_; }

  /// d~ = sum_i (D_i - 1), the number of independent proportionality constraints.
  int d_tilde() const {
    int s = 0;
    for (const auto& v : rho_) s += static_cast<int>(v.size()) - 1;
    return s;
  }

 private:
  std::vector<std::vector<double>> rho_;
};

/// Realized per-feature proportions of a committee.
struct RepresentationProfile {
  std::vector<std::vector<double>> lambda;

  int feature_count() const { return static_cast<int>(lambda.size()); }
};

/// Multiset of accepted candidates with per-cell counts N_j^i maintained
/// incrementally. Single-writer; re-derivable from members() for audit.
class Committee {
 public:
  explicit Committee(CandidateSpace space)
      : space_(std::move(space)), counts_(space_.cell_count(), 0) {}

  const CandidateSpace& space() const { return space_; }
  std::size_t size() const { return members_.size(); }
  const std::vector<Candidate>& members() const { return members_; }

  /// N_j^i: members with value j on feature i.
  std::int64_t count(int feature, int value) const {
    return counts_[space_.cell_index(feature, value)];
  }

  void add(const Candidate& x) {
    if (!space_.contains(x)) throw Error("Committee::add: candidate outside space");
    members_.push_back(x);
    for (int i = 0; i < space_.feature_count(); ++i)
      ++counts_[space_.cell_index(i, x.values[i])];
  }

  /// Removes one member equal to x (multiset erase).
  void remove(const Candidate& x) {
    for (auto it = members_.begin(); it != members_.end(); ++it) {
      if (*it == x) {
        for (int i = 0; i < space_.feature_count(); ++i)
          --counts_[space_.cell_index(i, x.values[i])];
        members_.erase(it);
        return;
      }
    }
    throw Error("Committee::remove: no such member");
  }

  /// Full recount from the member list; oracle for the incremental counts.
  std::vector<std::int64_t> counts_from_members() const {
    std::vector<std::int64_t> c(space_.cell_count(), 0);
    for (const auto& x : members_)
      for (int i = 0; i < space_.feature_count(); ++i)
        ++c[space_.cell_index(i, x.values[i])];
    return c;
  }

  const std::vector<std::int64_t>& counts() const { return counts_; }

 private:
  CandidateSpace space_;
  std::vector<Candidate> members_;
  std::vector<std::int64_t> counts_;
};

/// lambda_j^i = N_j^i / |C|. Throws EmptyCommittee when |C| = 0.
inline RepresentationProfile representation_profile(const Committee& committee) {
  if (committee.size() == 0)
    throw EmptyCommittee("representation_profile: committee is empty");
  const CandidateSpace& space = committee.space();
  RepresentationProfile out;
  out.lambda.resize(space.feature_count());
  const double n = static_cast<double>(committee.size());
  for (int i = 0; i < space.feature_count(); ++i) {
    out.lambda[i].resize(space.domain_size(i));
    for (int j = 0; j < space.domain_size(i); ++j)
      out.lambda[i][j] = static_cast<double>(committee.count(i, j)) / n;
  }
  return out;
}

namespace detail {

inline void check_same_shape(const std::vector<std::vector<double>>& a,
                             const std::vector<std::vector<double>>& b,
                             const char* what) {
  if (a.size() != b.size()) throw ShapeMismatch(std::string(what) + ": feature count differs");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size() != b[i].size())
      throw ShapeMismatch(std::string(what) + ": domain size differs on feature " +
                          std::to_string(i));
}

}  // namespace detail

/// l-infinity distance max_{i,j} |lambda_j^i - rho_j^i| over all cells.
inline double representation_loss(const RepresentationProfile& profile,
                                  const TargetProfile& target) {
  detail::check_same_shape(profile.lambda, target.vectors(), "representation_loss");
  double worst = 0.0;
  for (std::size_t i = 0; i < profile.lambda.size(); ++i)
    for (std::size_t j = 0; j < profile.lambda[i].size(); ++j)
      worst = std::max(worst, std::abs(profile.lambda[i][j] - target.vectors()[i][j]));
  return worst;
}

/// Same distance restricted to cells j in [D_i - 1], the cells carrying the
/// independent constraints; the bound checks that reference d~ use this one.
inline double representation_loss_restricted(const RepresentationProfile& profile,
                                             const TargetProfile& target) {
  detail::check_same_shape(profile.lambda, target.vectors(), "representation_loss");
  double worst = 0.0;
  for (std::size_t i = 0; i < profile.lambda.size(); ++i)
    for (std::size_t j = 0; j + 1 < profile.lambda[i].size(); ++j)
      worst = std::max(worst, std::abs(profile.lambda[i][j] - target.vectors()[i][j]));
  return worst;
}

/// l-infinity distance between two profiles (metric; used by property tests).
inline double profile_distance(const RepresentationProfile& a, const RepresentationProfile& b) {
  detail::check_same_shape(a.lambda, b.lambda, "profile_distance");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.lambda.size(); ++i)
    for (std::size_t j = 0; j < a.lambda[i].size(); ++j)
      worst = std::max(worst, std::abs(a.lambda[i][j] - b.lambda[i][j]));
  return worst;
}

}  // namespace panelforge
