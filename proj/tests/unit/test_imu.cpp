#include <numbers>

#include "bodyio/error.hpp"
#include "bodyio/imu.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bodyio;

namespace {

struct Fixture {
  ImuWindow window;
  std::vector<RotationSO3> rotations;
};

Fixture random_window(std::uint64_t seed, int n = 50) {
  Rng rng(seed);
  Fixture f;
  for (int i = 0; i < n; ++i) {
    ImuSample s;
    s.t = i * 0.005;
    s.w = test::random_vec(rng, 2);
    s.a = test::random_vec(rng, 10);
    f.window.samples.push_back(s);
    f.rotations.push_back(test::random_rotation(rng));
  }
  return f;
}

}  // namespace

TEST_CASE("specific force examples") {
  CHECK((specific_force(Vec3::Zero(), RotationSO3()) - Vec3(0, 0, 9.80665)).norm() == 0.0);
  CHECK((specific_force(Vec3::Zero(), rot_x(std::numbers::pi)) - Vec3(0, 0, -9.80665)).norm() <
        1e-14);
  const RotationSO3 yaw = rot_z(std::numbers::pi / 2);
  const Vec3 a_world(1, 0, 0);
  const Vec3 oracle = yaw.matrix().transpose() * (a_world - GravityModel{}.g_world);
  CHECK((specific_force(a_world, yaw) - oracle).norm() < 1e-15);
  CHECK((oracle - Vec3(0, -1, 9.80665)).norm() < 1e-15);
}

TEST_CASE("representation names") {
  CHECK(representation_from_string("body_minus_gravity") == RepresentationKind::BodyMinusGravity);
  CHECK(representation_from_string("GlobalPlusAttitude") == RepresentationKind::GlobalPlusAttitude);
  CHECK(to_string(RepresentationKind::Global) == "Global");
  CHECK_THROWS_AS(representation_from_string("sideways"), Error);
  CHECK(is_body_frame(RepresentationKind::BodyPlusAttitude));
  CHECK_FALSE(is_body_frame(RepresentationKind::GlobalMinusGravity));
  CHECK(has_attitude(RepresentationKind::GlobalPlusAttitude));
  CHECK_FALSE(has_attitude(RepresentationKind::BodyMinusGravity));
}

TEST_CASE("Body passes through unchanged") {
  const auto f = random_window(1);
  const auto out = transform_representation(f.window, RepresentationKind::Body, {});
  REQUIRE(out.size() == f.window.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out.samples[i].a == f.window.samples[i].a);
    CHECK(out.samples[i].w == f.window.samples[i].w);
  }
  CHECK(out.attitudes.empty());
}

TEST_CASE("hover reading minus gravity is zero") {
  ImuWindow w;
  w.samples.push_back({0.0, Vec3::Zero(), Vec3(0, 0, 9.80665)});
  const std::vector<RotationSO3> r(1);
  const auto out = transform_representation(w, RepresentationKind::BodyMinusGravity, r);
  CHECK(out.samples[0].a.norm() == 0.0);
}

TEST_CASE("Global rotates both channels per sample") {
  const auto f = random_window(2);
  const auto g = transform_representation(f.window, RepresentationKind::Global, f.rotations);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK((g.samples[i].a - f.rotations[i] * f.window.samples[i].a).norm() < 1e-14);
    CHECK((g.samples[i].w - f.rotations[i] * f.window.samples[i].w).norm() < 1e-14);
  }
}

TEST_CASE("GlobalMinusGravity composes rotation with BodyMinusGravity") {
  const auto f = random_window(3);
  const auto bmg =
      transform_representation(f.window, RepresentationKind::BodyMinusGravity, f.rotations);
  const auto gmg =
      transform_representation(f.window, RepresentationKind::GlobalMinusGravity, f.rotations);
  for (std::size_t i = 0; i < f.window.size(); ++i) {
    CHECK((gmg.samples[i].a - f.rotations[i] * bmg.samples[i].a).norm() < 1e-12);
    // Gyro untouched by gravity removal.
    CHECK(bmg.samples[i].w == f.window.samples[i].w);
    // Adding the gravity term back recovers the reading.
    const Vec3 back =
        bmg.samples[i].a + f.rotations[i].matrix().transpose() * (-GravityModel{}.g_world);
    CHECK((back - f.window.samples[i].a).norm() < 1e-14);
  }
}

TEST_CASE("attitude kinds attach log of the rotations") {
  const auto f = random_window(4);
  for (auto kind : {RepresentationKind::BodyPlusAttitude, RepresentationKind::GlobalPlusAttitude}) {
    const auto out = transform_representation(f.window, kind, f.rotations);
    REQUIRE(out.attitudes.size() == f.window.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK((out.attitudes[i] - log_so3(f.rotations[i])).norm() == 0.0);
  }
  const auto body = transform_representation(f.window, RepresentationKind::BodyPlusAttitude,
                                             f.rotations);
  CHECK(body.samples[7].a == f.window.samples[7].a);
}

TEST_CASE("transform errors") {
  const auto f = random_window(5, 10);
  std::vector<RotationSO3> short_rot(f.rotations.begin(), f.rotations.begin() + 5);
  CHECK_THROWS_AS(transform_representation(f.window, RepresentationKind::Global, short_rot),
                  Error);
  CHECK_THROWS_AS(transform_representation(f.window, RepresentationKind::BodyPlusAttitude, {}),
                  Error);
  auto global = transform_representation(f.window, RepresentationKind::Global, f.rotations);
  CHECK_THROWS_AS(transform_representation(global, RepresentationKind::Global, f.rotations),
                  Error);
}
