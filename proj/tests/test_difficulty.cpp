#include <cmath>
#include <random>

#include "culr/difficulty.hpp"
#include "culr/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace culr;
using doctest::Approx;

namespace {

CanonicalOrder order_of(std::vector<int> ranks) {
  CanonicalOrder o;
  o.ranks = std::move(ranks);
  return o;
}

std::vector<DifficultyScore> scores_of(const std::vector<std::pair<std::string, double>>& values) {
  std::vector<DifficultyScore> out;
  for (const auto& [id, v] : values) out.push_back({id, DifficultyMetric::shifts, v, v});
  return out;
}

}  // namespace

TEST_CASE("metric names") {
  for (auto m : {DifficultyMetric::shifts, DifficultyMetric::expert_inversions, DifficultyMetric::data_inversions,
                 DifficultyMetric::neg_loglik}) {
    CHECK(parse_difficulty_metric(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_difficulty_metric("length"), DataError);
}

TEST_CASE("rhetorical shifts") {
  CHECK(score_rhetorical_shifts(oracle::make_doc("a", {0, 0, 0})).value == 0.0);
  CHECK(score_rhetorical_shifts(oracle::make_doc("b", {0, 1, 0, 1})).value == Approx(0.75).epsilon(1e-12));
  // [F, F, Arg, R, R]
  const DifficultyScore s = score_rhetorical_shifts(oracle::make_doc("c", {1, 1, 0, 2, 2}));
  CHECK(s.value == Approx(0.4).epsilon(1e-12));
  CHECK(s.raw == 2.0);
}

TEST_CASE("inversion examples") {
  const CanonicalOrder o = order_of({0, 1, 2, 3});
  CHECK(score_inversions(oracle::make_doc("a", {0, 1, 2, 3}), o).value == 0.0);
  const DifficultyScore rev = score_inversions(oracle::make_doc("b", {3, 2, 1, 0}), o);
  CHECK(rev.value == 1.0);
  CHECK(rev.raw == 6.0);
  CHECK(score_inversions(oracle::make_doc("c", {0, 0, 1}), o).value == 0.0);
  CHECK(score_inversions(oracle::make_doc("d", {2}), o).value == 0.0);
  CHECK(count_inversions(std::vector<int>{}) == 0);
}

TEST_CASE("merge-sort inversions equal the pair count") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(0, 50)(rng);
    const int L = std::uniform_int_distribution<int>(1, 13)(rng);
    const auto keys = oracle::random_keys(m, L, rng);
    REQUIRE(count_inversions(keys) == oracle::brute_force_inversions(keys));
  }
}

TEST_CASE("negative log-likelihood") {
  const Document d1 = oracle::make_doc("d1", {0, 0, 1});
  const Document d2 = oracle::make_doc("d2", {0, 1, 1});
  const TransitionMatrix tm = estimate_transition_matrix({&d1, &d2}, 2, 1.0);
  const double expected = -(std::log(0.75) + std::log(0.6) + std::log(2.0 / 3.0)) / 3.0;
  const DifficultyScore s = score_neg_loglik(oracle::make_doc("x", {0, 1, 1}), tm);
  CHECK(s.value == Approx(expected).epsilon(1e-12));
  CHECK(s.value == Approx(0.4013).epsilon(1e-4));

  const DifficultyScore no_start = score_neg_loglik(oracle::make_doc("x", {0, 1, 1}), tm, false);
  CHECK(no_start.value == Approx(-(std::log(0.6) + std::log(2.0 / 3.0)) / 3.0).epsilon(1e-12));

  const Document a = oracle::make_doc("a", {0});
  const TransitionMatrix certain = estimate_transition_matrix({&a}, 1, 1.0);
  CHECK(score_neg_loglik(a, certain).value == 0.0);

  const TransitionMatrix raw = estimate_transition_matrix({&d1, &d2}, 2, 0.0);
  CHECK_THROWS_AS(score_neg_loglik(oracle::make_doc("y", {0, 1, 0}), raw), InfiniteDifficultyError);
}

TEST_CASE("bucket sizes and tie order") {
  std::vector<std::pair<std::string, double>> v;
  for (int i = 0; i < 10; ++i) v.emplace_back("d" + std::to_string(i), 10 - i);
  const BucketAssignment b = rank_and_bucket(scores_of(v), 3);
  REQUIRE(b.num_buckets() == 3);
  CHECK(b.buckets[0].size() == 4);
  CHECK(b.buckets[1].size() == 3);
  CHECK(b.buckets[2].size() == 3);
  CHECK(b.buckets[0].front() == "d9");
  CHECK(b.num_documents() == 10);

  const BucketAssignment one = rank_and_bucket(scores_of(v), 1);
  CHECK(one.buckets.size() == 1);
  CHECK(one.buckets[0].size() == 10);

  const BucketAssignment tie = rank_and_bucket(scores_of({{"zeta", 1.0}, {"alpha", 1.0}}), 1);
  CHECK(tie.buckets[0] == std::vector<std::string>{"alpha", "zeta"});

  CHECK_THROWS_AS(rank_and_bucket(scores_of(v), 0), DataError);
  CHECK_THROWS_AS(rank_and_bucket(scores_of(v), 11), DataError);
}

TEST_CASE("bucketing is invariant to strictly increasing transforms and input order") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    std::vector<std::pair<std::string, double>> v;
    for (std::size_t i = 0; i < n; ++i) {
      v.emplace_back("doc" + std::to_string(i), std::uniform_int_distribution<int>(0, 5)(rng) / 5.0);
    }
    const std::size_t B = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    const BucketAssignment base = rank_and_bucket(scores_of(v), B);

    auto transformed = v;
    for (auto& p : transformed) p.second = std::exp(3.0 * p.second) - 7.0;
    std::shuffle(transformed.begin(), transformed.end(), rng);
    CHECK(rank_and_bucket(scores_of(transformed), B).buckets == base.buckets);

    std::size_t total = 0;
    for (const auto& bucket : base.buckets) {
      total += bucket.size();
      CHECK(bucket.size() >= n / B);
      CHECK(bucket.size() <= n / B + 1);
    }
    CHECK(total == n);
  }
}

TEST_CASE("scores do not depend on corpus order") {
  std::vector<Document> store;
  std::mt19937_64 rng(3);
  for (int d = 0; d < 12; ++d) {
    std::vector<RoleId> labels(std::uniform_int_distribution<std::size_t>(1, 9)(rng));
    for (auto& l : labels) l = static_cast<RoleId>(std::uniform_int_distribution<int>(0, 3)(rng));
    store.push_back(oracle::make_doc("d" + std::to_string(d), labels));
  }
  std::vector<const Document*> fwd, rev;
  for (const auto& d : store) fwd.push_back(&d);
  rev.assign(fwd.rbegin(), fwd.rend());
  for (auto metric : {DifficultyMetric::shifts, DifficultyMetric::data_inversions, DifficultyMetric::neg_loglik}) {
    const TransitionMatrix tf = estimate_transition_matrix(fwd, 4, 1.0);
    const TransitionMatrix tr = estimate_transition_matrix(rev, 4, 1.0);
    ScoringInputs a{&tf, nullptr, true};
    ScoringInputs b{&tr, nullptr, true};
    const auto sa = score_documents(fwd, metric, a);
    const auto sb = score_documents(rev, metric, b);
    for (std::size_t i = 0; i < sa.size(); ++i) {
      CHECK(sa[i].doc_id == sb[sa.size() - 1 - i].doc_id);
      CHECK(sa[i].value == sb[sa.size() - 1 - i].value);
      CHECK(sa[i].value >= 0.0);
    }
  }
}

TEST_CASE("expert inversions need an order") {
  const Document d = oracle::make_doc("d", {1, 0});
  CHECK_THROWS_AS(score_documents({&d}, DifficultyMetric::expert_inversions, {}), DataError);
  const CanonicalOrder o = order_of({0, 1});
  ScoringInputs in;
  in.expert_order = &o;
  const auto s = score_documents({&d}, DifficultyMetric::expert_inversions, in);
  CHECK(s[0].value == 1.0);
  CHECK(s[0].metric == DifficultyMetric::expert_inversions);
}
