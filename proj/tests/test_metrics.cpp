#include <random>

#include "culr/error.hpp"
#include "culr/metrics.hpp"
#include "doctest.h"

using namespace culr;
using doctest::Approx;
using Eigen::MatrixXd;

TEST_CASE("two-class toy example") {
  MatrixXd c = MatrixXd::Zero(2, 2);
  tally_confusion(c, {0, 0, 1, 1}, {0, 1, 1, 1});
  MatrixXd expected(2, 2);
  expected << 1, 1, 0, 2;
  CHECK(c == expected);
  const Metrics m = compute_metrics(c);
  CHECK(m.micro_f1 == 0.75);
  CHECK(m.accuracy == 0.75);
  CHECK(m.per_class[0].f1 == Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.per_class[1].f1 == Approx(0.8).epsilon(1e-12));
  CHECK(m.macro_f1 == Approx((2.0 / 3.0 + 0.8) / 2.0).epsilon(1e-12));
  CHECK(m.macro_f1 == Approx(0.7333).epsilon(1e-4));
  CHECK(m.per_class[1].support == 2);
  CHECK(m.per_class[1].predicted == 3);
}

TEST_CASE("perfect predictions") {
  MatrixXd c = MatrixXd::Zero(3, 3);
  tally_confusion(c, {0, 1, 2, 2}, {0, 1, 2, 2});
  const Metrics m = compute_metrics(c);
  CHECK(m.macro_f1 == 1.0);
  CHECK(m.micro_f1 == 1.0);
  CHECK(c.isDiagonal());
}

TEST_CASE("classes absent from gold and predictions do not count toward macro-F1") {
  MatrixXd c = MatrixXd::Zero(3, 3);
  tally_confusion(c, {0, 1}, {0, 0});
  const Metrics m = compute_metrics(c);
  // Class 0: P=1/2, R=1, F1=2/3; class 1: F1=0; class 2 unused.
  CHECK(m.macro_f1 == Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("micro-F1 equals accuracy and counts are conserved") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = std::uniform_int_distribution<int>(1, 6)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    std::vector<RoleId> gold(n), pred(n);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = static_cast<RoleId>(std::uniform_int_distribution<int>(0, L - 1)(rng));
      pred[i] = static_cast<RoleId>(std::uniform_int_distribution<int>(0, L - 1)(rng));
      correct += gold[i] == pred[i];
    }
    MatrixXd c = MatrixXd::Zero(L, L);
    tally_confusion(c, gold, pred);
    CHECK(c.sum() == static_cast<double>(n));
    const Metrics m = compute_metrics(c);
    CHECK(m.micro_f1 == m.accuracy);
    CHECK(m.accuracy == Approx(static_cast<double>(correct) / static_cast<double>(n)).epsilon(1e-12));
    CHECK(m.macro_f1 >= 0.0);
    CHECK(m.macro_f1 <= 1.0);
  }
}

TEST_CASE("confusion JSON round-trip re-indexes roles") {
  MatrixXd c(2, 2);
  c << 8, 2, 1, 9;
  const auto j = confusion_json(c, RoleInventory({"A", "B"}));
  CHECK(confusion_from_json(j, RoleInventory({"A", "B"})) == c);
  MatrixXd swapped(2, 2);
  swapped << 9, 1, 2, 8;
  CHECK(confusion_from_json(j, RoleInventory({"B", "A"})) == swapped);
  CHECK_THROWS_AS(confusion_from_json(j, RoleInventory({"A", "C"})), DataError);
  CHECK_THROWS_AS(compute_metrics(MatrixXd::Zero(2, 2)), DataError);
}
