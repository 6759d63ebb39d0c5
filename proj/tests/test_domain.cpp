#include <catch2/catch_amalgamated.hpp>

#include "panelforge/domain.hpp"
#include "panelforge/rng.hpp"

using namespace panelforge;

namespace {

// 2 binary features: gender {M=0, F=1}, age {S=0, J=1}.
CandidateSpace example_space() { return CandidateSpace({2, 2}, {"gender", "age"}); }

const Candidate MS{{0, 0}};
const Candidate MJ{{0, 1}};
const Candidate FS{{1, 0}};
const Candidate FJ{{1, 1}};

RepresentationProfile random_profile(Rng& rng, const CandidateSpace& space) {
  RepresentationProfile p;
  p.lambda.resize(space.feature_count());
  for (int i = 0; i < space.feature_count(); ++i) {
    double sum = 0.0;
    p.lambda[i].resize(space.domain_size(i));
    for (double& v : p.lambda[i]) {
      v = rng.uniform01() + 1e-3;
      sum += v;
    }
    for (double& v : p.lambda[i]) v /= sum;
  }
  return p;
}

}  // namespace

TEST_CASE("candidate space validates its invariants") {
  CHECK_THROWS_AS(CandidateSpace({}), Error);
  CHECK_THROWS_AS(CandidateSpace({2, 1}), Error);
  // 12^9 > 2^31
  CHECK_THROWS_AS(CandidateSpace(std::vector<int>(9, 12)), Error);
  CHECK_NOTHROW(CandidateSpace(std::vector<int>(9, 10)));  // 10^9 < 2^31
}

TEST_CASE("flat index encoding is a bijection") {
  CandidateSpace space({3, 2, 4});
  REQUIRE(space.cardinality() == 24);
  for (std::int64_t k = 0; k < space.cardinality(); ++k) {
    const Candidate x = space.candidate_at(k);
    CHECK(space.contains(x));
    CHECK(space.flat_index(x) == k);
  }
}

TEST_CASE("representation profile counts cells") {
  Committee c(example_space());
  c.add(FS);
  c.add(MS);
  c.add(MS);
  c.add(FJ);
  const RepresentationProfile p = representation_profile(c);
  CHECK(p.lambda[0][0] == 0.5);   // M
  CHECK(p.lambda[0][1] == 0.5);   // F
  CHECK(p.lambda[1][0] == 0.75);  // S
  CHECK(p.lambda[1][1] == 0.25);  // J
}

TEST_CASE("single-member committee has a one-hot profile") {
  Committee c(example_space());
  c.add(FJ);
  const RepresentationProfile p = representation_profile(c);
  CHECK(p.lambda[0][0] == 0.0);
  CHECK(p.lambda[0][1] == 1.0);
  CHECK(p.lambda[1][0] == 0.0);
  CHECK(p.lambda[1][1] == 1.0);
}

TEST_CASE("empty committee cannot be profiled") {
  Committee c(example_space());
  CHECK_THROWS_AS(representation_profile(c), EmptyCommittee);
}

TEST_CASE("uniform sampling concentrates the profile") {
  // Hoeffding at delta = 0.01: 1000 uniform members keep every cell within
  // 0.06 of 1/2; the seed is fixed so this is deterministic.
  CandidateSpace space = example_space();
  Committee c(space);
  Rng rng(20240601);
  for (int i = 0; i < 1000; ++i)
    c.add(space.candidate_at(static_cast<std::int64_t>(rng.below(4))));
  const RepresentationProfile p = representation_profile(c);
  for (const auto& feature : p.lambda)
    for (double v : feature) CHECK(std::abs(v - 0.5) < 0.06);
}

TEST_CASE("representation loss is the worst cell deviation") {
  CandidateSpace space = example_space();
  TargetProfile example_target(space, {{0.5, 0.5}, {0.75, 0.25}});

  Committee c(space);
  c.add(FS);
  c.add(MS);
  c.add(MS);
  c.add(FJ);
  CHECK(representation_loss(representation_profile(c), example_target) == 0.0);

  TargetProfile half(space, {{0.5, 0.5}, {0.5, 0.5}});
  Committee males(space);
  males.add(MS);
  males.add(MJ);
  CHECK(representation_loss(representation_profile(males), half) == 0.5);

  TargetProfile wide(CandidateSpace({3, 2}), {{0.3, 0.3, 0.4}, {0.5, 0.5}});
  CHECK_THROWS_AS(representation_loss(representation_profile(c), wide), ShapeMismatch);
}

TEST_CASE("loss restricted to independent cells on a binary space matches") {
  CandidateSpace space = example_space();
  TargetProfile target(space, {{0.5, 0.5}, {0.75, 0.25}});
  Committee c(space);
  c.add(MS);
  c.add(MS);
  c.add(FJ);
  const RepresentationProfile p = representation_profile(c);
  // Binary features: |lambda_1 - rho_1| = |lambda_2 - rho_2| per feature.
  CHECK(representation_loss(p, target) ==
        Catch::Approx(representation_loss_restricted(p, target)));
}

TEST_CASE("profile distance is a metric") {
  CandidateSpace space({3, 2});
  Rng rng(7);
  for (int round = 0; round < 200; ++round) {
    const RepresentationProfile a = random_profile(rng, space);
    const RepresentationProfile b = random_profile(rng, space);
    const RepresentationProfile c = random_profile(rng, space);
    CHECK(profile_distance(a, b) >= 0.0);
    CHECK(profile_distance(a, a) == 0.0);
    CHECK(profile_distance(a, b) == profile_distance(b, a));
    CHECK(profile_distance(a, c) <= profile_distance(a, b) + profile_distance(b, c) + 1e-12);
  }
}

TEST_CASE("profiles are insertion-order invariant") {
  CandidateSpace space = example_space();
  Committee ab(space), ba(space);
  ab.add(MS);
  ab.add(FJ);
  ba.add(FJ);
  ba.add(MS);
  CHECK(representation_profile(ab).lambda == representation_profile(ba).lambda);
}

TEST_CASE("incremental counts equal a full recount") {
  CandidateSpace space({3, 2, 2});
  Committee c(space);
  Rng rng(42);
  std::vector<Candidate> added;
  for (int i = 0; i < 500; ++i) {
    const Candidate x = space.candidate_at(static_cast<std::int64_t>(rng.below(12)));
    c.add(x);
    added.push_back(x);
  }
  for (int i = 0; i < 100; ++i) c.remove(added[static_cast<std::size_t>(rng.below(400))]);
  CHECK(c.counts() == c.counts_from_members());
  std::int64_t total = 0;
  for (int j = 0; j < space.domain_size(0); ++j) total += c.count(0, j);
  CHECK(total == static_cast<std::int64_t>(c.size()));
}

TEST_CASE("target profiles enforce the simplex invariants") {
  CandidateSpace space = example_space();
  CHECK_THROWS_AS(TargetProfile(space, {{0.5, 0.6}, {0.5, 0.5}}), BadTarget);
  CHECK_THROWS_AS(TargetProfile(space, {{1.0, 0.0}, {0.5, 0.5}}), BadTarget);
  CHECK_THROWS_AS(TargetProfile(space, {{0.5, 0.5}}), ShapeMismatch);

  TargetProfile brexit_like(CandidateSpace({2, 3}), {{0.5, 0.5}, {0.2, 0.3, 0.5}});
  CHECK(brexit_like.d_tilde() == 3);
}
