#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include "culr/pacing.hpp"
#include "doctest.h"

using namespace culr;

namespace {

BucketAssignment ten_docs() {
  BucketAssignment a;
  a.buckets = {{"d3", "d7", "d1", "d0"}, {"d9", "d2", "d5"}, {"d8", "d4", "d6"}};
  return a;
}

}  // namespace

TEST_CASE("cumulative stages of a (4,3,3) assignment") {
  const BabyStepSchedule s = build_schedule(ten_docs(), 2);
  REQUIRE(s.num_stages() == 3);
  CHECK(s.stages[0].size() == 4);
  CHECK(s.stages[1].size() == 7);
  CHECK(s.stages[2].size() == 10);
  CHECK(s.scheduled_epochs() == 6);
  CHECK(stage_documents(s, 0) == std::vector<std::string>{"d0", "d1", "d3", "d7"});
  CHECK(stage_documents(s, 1) == std::vector<std::string>{"d0", "d1", "d2", "d3", "d5", "d7", "d9"});
  CHECK_THROWS_AS(stage_documents(s, 3), std::out_of_range);
}

TEST_CASE("single bucket is the full set") {
  BucketAssignment a;
  a.buckets = {{"b", "a", "c"}};
  const BabyStepSchedule s = build_schedule(a, 4);
  CHECK(s.num_stages() == 1);
  CHECK(stage_documents(s, 0) == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("random assignments give monotone, complete stages") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    const std::size_t B = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("x" + std::to_string(i));
    std::shuffle(ids.begin(), ids.end(), rng);
    BucketAssignment a;
    a.buckets.resize(B);
    for (std::size_t i = 0; i < n; ++i) a.buckets[i % B].push_back(ids[i]);
    const BabyStepSchedule s = build_schedule(a, 1);
    for (std::size_t k = 0; k < B; ++k) {
      const auto& stage = s.stages[k];
      CHECK(std::is_sorted(stage.begin(), stage.end()));
      if (k > 0) CHECK(std::includes(stage.begin(), stage.end(), s.stages[k - 1].begin(), s.stages[k - 1].end()));
    }
    CHECK(std::set<std::string>(s.stages.back().begin(), s.stages.back().end()) ==
          std::set<std::string>(ids.begin(), ids.end()));
  }
}

TEST_CASE("schedule JSON lists buckets and stage sizes") {
  const auto j = to_json(build_schedule(ten_docs(), 2));
  CHECK(j.at("epochs_per_stage") == 2);
  CHECK(j.at("scheduled_epochs") == 6);
  CHECK(j.at("stages").at(1).at("size") == 7);
  CHECK(j.at("stages").at(2).at("first_epoch") == 4);
}
