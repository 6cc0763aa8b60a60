#include <cmath>
#include <numbers>

#include "bodyio/error.hpp"
#include "bodyio/metrics.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bodyio;

namespace {

// Straight line at 1 m/s along x, sampled at `rate` Hz.
AlignedPair line(double duration, double rate) {
  AlignedPair pair;
  const int n = static_cast<int>(std::lround(duration * rate)) + 1;
  for (int i = 0; i < n; ++i) {
    const double t = i / rate;
    pair.truth.push_back({t, RotationSO3(), Vec3(t, 0, 0)});
  }
  pair.estimate = pair.truth;
  return pair;
}

AlignedPair wiggly(std::uint64_t seed, int n = 300) {
  Rng rng(seed);
  AlignedPair pair;
  Vec3 p = Vec3::Zero(), q = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const double t = 0.1 * i;
    p += test::random_vec(rng, 0.1);
    q = p + test::random_vec(rng, 0.2);
    pair.truth.push_back({t, exp_so3(test::random_vec(rng, 0.5)), p});
    pair.estimate.push_back({t, exp_so3(test::random_vec(rng, 0.5)), q});
  }
  return pair;
}

}  // namespace

TEST_CASE("ate examples") {
  AlignedPair pair = line(10, 10);
  CHECK(ate(pair) == 0.0);
  for (auto& e : pair.estimate) e.p += Vec3(1, 0, 0);
  CHECK(ate(pair) == 1.0);

  AlignedPair two;
  two.truth = {{0.0, RotationSO3(), Vec3::Zero()}, {1.0, RotationSO3(), Vec3::Zero()}};
  two.estimate = {{0.0, RotationSO3(), Vec3::Zero()}, {1.0, RotationSO3(), Vec3(0, 2, 0)}};
  CHECK(ate(two) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("ate is nonnegative and zero only on identical positions") {
  for (std::uint64_t s = 1; s < 6; ++s) {
    AlignedPair pair = wiggly(s);
    CHECK(ate(pair) > 0.0);
    pair.estimate = pair.truth;
    CHECK(ate(pair) == 0.0);
  }
}

TEST_CASE("optional rigid alignment") {
  AlignedPair pair = wiggly(3);
  pair.estimate = pair.truth;
  const RotationSO3 r = exp_so3(Vec3(0.1, -0.2, 0.7));
  for (auto& e : pair.estimate) e.p = r * e.p + Vec3(3, -1, 2);
  CHECK(ate(pair) > 1.0);
  CHECK(ate(pair, AteAlignment::Se3) < 1e-9);
  // Alignment never does worse than no alignment.
  const AlignedPair noisy = wiggly(4);
  CHECK(ate(noisy, AteAlignment::Se3) <= ate(noisy) + 1e-12);
}

TEST_CASE("pair validation") {
  AlignedPair pair = line(1, 10);
  pair.estimate.pop_back();
  CHECK_THROWS_AS(ate(pair), Error);
  pair = line(1, 10);
  pair.estimate[3].t += 1e-6;
  CHECK_THROWS_AS(ate(pair), Error);
  AlignedPair single;
  single.truth = single.estimate = {Pose{}};
  CHECK_THROWS_AS(ate(single), Error);
}

TEST_CASE("rte examples") {
  AlignedPair pair = line(20, 10);
  CHECK(rte(pair) == 0.0);
  for (auto& e : pair.estimate) e.p += Vec3(4, -2, 7);
  CHECK(rte(pair) < 1e-14);

  pair = line(20, 10);
  for (auto& e : pair.estimate) e.r = rot_z(std::numbers::pi / 2);
  const auto residuals = rte_residuals(pair, 5.0);
  CHECK(residuals.size() == pair.truth.size() - 50);
  for (double r : residuals) CHECK(r == doctest::Approx(5.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(rte(pair) == doctest::Approx(5.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("rte invariances") {
  for (std::uint64_t s = 1; s < 4; ++s) {
    const AlignedPair pair = wiggly(s);
    AlignedPair shifted = pair;
    for (auto& e : shifted.estimate) e.p += Vec3(-3, 8, 1);
    CHECK(std::abs(rte(shifted, 2.0) - rte(pair, 2.0)) < 1e-12);
    // Sequence order in a batch does not matter: metrics are per pair.
    CHECK(rte(pair, 2.0) == rte(AlignedPair(pair), 2.0));
  }
}

TEST_CASE("rte needs a span longer than the interval") {
  CHECK_THROWS_AS(rte(line(5, 10), 5.0), Error);
  CHECK_NOTHROW(rte(line(5.2, 10), 5.0));
}

TEST_CASE("accuracy auc examples") {
  CHECK(accuracy_auc_from_residuals({0.0, 0.0, 0.0}, 1.0, 100) == 1.0);
  CHECK(accuracy_auc_from_residuals({1.5, 2.0}, 1.0, 100) == 0.0);
  CHECK(std::abs(accuracy_auc_from_residuals({0.5}, 1.0, 100) - 0.5) <= 0.01 + 1e-12);
  CHECK(accuracy_auc(line(20, 10), 5.0, 1.0, 100) == 1.0);
  CHECK_THROWS_AS(accuracy_auc_from_residuals({0.5}, 0.0, 100), Error);
  CHECK_THROWS_AS(accuracy_auc_from_residuals({0.5}, 1.0, 0), Error);
}

TEST_CASE("accuracy is nondecreasing in the threshold") {
  const auto residuals = rte_residuals(wiggly(7), 2.0);
  double prev = -1.0;
  for (int k = 1; k <= 50; ++k) {
    // AUC with a single threshold is the accuracy at that threshold.
    const double acc = accuracy_auc_from_residuals(residuals, 0.05 * k, 1);
    CHECK(acc >= prev);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    prev = acc;
  }
  const double auc = accuracy_auc(wiggly(7), 2.0, 1.0, 100);
  CHECK(auc >= 0.0);
  CHECK(auc <= 1.0);
}

TEST_CASE("improvement percentage") {
  CHECK(improvement_percentage(10, 5) == 50.0);
  CHECK(std::abs(improvement_percentage(1.189, 0.403) - 66.1) <= 0.05);
  CHECK(improvement_percentage(0.7, 0.7) == 0.0);
  CHECK(improvement_percentage(1.0, 2.0) == -100.0);
  CHECK_THROWS_AS(improvement_percentage(0.0, 1.0), Error);
  CHECK_THROWS_AS(improvement_percentage(-1.0, 1.0), Error);
}

TEST_CASE("report rows and aggregate") {
  CHECK(with_aggregate({}).empty());
  CHECK(report_csv({}) == "seq,ate_m,rte_m,auc,vs_baseline_pct\n");
  CHECK(report_text({}).find("no sequences") != std::string::npos);

  const std::vector<SequenceResult> one{{"a", 1.0, 2.0, 0.5, 10.0}};
  const auto agg1 = with_aggregate(one);
  REQUIRE(agg1.size() == 2);
  CHECK(agg1[1].seq == "mean");
  CHECK(agg1[1].ate_m == 1.0);

  const std::vector<SequenceResult> two{{"a", 1.0, 2.0, 0.5, 10.0}, {"b", 3.0, 4.0, 0.7, 30.0}};
  const auto agg2 = with_aggregate(two);
  REQUIRE(agg2.size() == 3);
  CHECK(agg2[2].ate_m == 2.0);
  CHECK(agg2[2].rte_m == 3.0);
  CHECK(agg2[2].auc == doctest::Approx(0.6));
  CHECK(agg2[2].vs_baseline_pct == 20.0);

  const std::string csv = report_csv(agg2);
  CHECK(csv.rfind("seq,ate_m,rte_m,auc,vs_baseline_pct\n", 0) == 0);
  CHECK(csv.find("\nb,3") != std::string::npos);
  CHECK(csv.find("\nmean,2") != std::string::npos);
  const std::string text = report_text(agg2);
  CHECK(text.find("vs_baseline_pct") != std::string::npos);
  CHECK(text.find("mean") != std::string::npos);
}
