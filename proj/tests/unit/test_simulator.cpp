#include <cmath>
#include <numbers>

#include "bodyio/error.hpp"
#include "bodyio/simulator.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bodyio;

namespace {

TrajectorySpec spec_of(TrajectoryKind kind, YawMode yaw) {
  TrajectorySpec s;
  s.kind = kind;
  s.yaw_mode = yaw;
  s.duration = 10.0;
  return s;
}

const TrajectoryKind kKinds[] = {TrajectoryKind::Circle, TrajectoryKind::Figure8,
                                 TrajectoryKind::Lissajous3D, TrajectoryKind::WaypointSpline};
const YawMode kYaws[] = {YawMode::FollowVelocity, YawMode::Spin, YawMode::Fixed};

// Body rate from central differences of the attitude.
Vec3 fd_body_rate(const TrajectorySpec& s, double t, double h) {
  const RotationSO3 a = evaluate_trajectory(s, t - h).r;
  const RotationSO3 b = evaluate_trajectory(s, t + h).r;
  return log_so3(a.inverse() * b) / (2 * h);
}

}  // namespace

TEST_CASE("circle centripetal acceleration and constant speed") {
  TrajectorySpec s = spec_of(TrajectoryKind::Circle, YawMode::FollowVelocity);
  s.amplitude = 2.0;
  s.angular_rate = 0.5;
  const auto samples = generate_trajectory(s);
  CHECK(samples.size() == 2001);
  for (const auto& x : samples) {
    CHECK(x.a_world.norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(x.v.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("fixed yaw has zero body rate") {
  for (auto kind : kKinds) {
    for (const auto& x : generate_trajectory(spec_of(kind, YawMode::Fixed)))
      CHECK(x.w_body.norm() == 0.0);
  }
}

TEST_CASE("velocity and acceleration are the derivatives of position") {
  for (auto kind : kKinds) {
    TrajectorySpec s = spec_of(kind, YawMode::FollowVelocity);
    s.tilt_amplitude = 0.2;
    double prev = 0.0;
    for (double h : {1e-2, 5e-3}) {
      double worst = 0.0;
      for (double t = 1.0; t < 9.0; t += 0.37) {
        const Vec3 fd =
            (evaluate_trajectory(s, t + h).p - evaluate_trajectory(s, t - h).p) / (2 * h);
        worst = std::max(worst, (fd - evaluate_trajectory(s, t).v).norm());
        const Vec3 fda =
            (evaluate_trajectory(s, t + h).v - evaluate_trajectory(s, t - h).v) / (2 * h);
        CHECK((fda - evaluate_trajectory(s, t).a_world).norm() < 1e-3);
      }
      if (prev > 1e-12) CHECK(prev / worst > 3.5);  // order >= 2 under halving
      prev = worst;
    }
  }
}

TEST_CASE("body rates agree with the attitude derivative") {
  for (auto kind : kKinds) {
    for (auto yaw : kYaws) {
      TrajectorySpec s = spec_of(kind, yaw);
      s.tilt_amplitude = 0.3;
      for (double t = 0.5; t < 9.5; t += 0.91) {
        CHECK((fd_body_rate(s, t, 1e-5) - evaluate_trajectory(s, t).w_body).norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("consecutive attitudes follow the body rate") {
  TrajectorySpec s = spec_of(TrajectoryKind::Lissajous3D, YawMode::Spin);
  s.tilt_amplitude = 0.3;
  const auto x = generate_trajectory(s);
  const double dt = 1.0 / s.imu_rate;
  for (std::size_t i = 0; i + 1 < x.size(); i += 17) {
    const RotationSO3 pred = x[i].r * exp_so3(x[i].w_body * dt);
    CHECK(geodesic_distance(pred, x[i + 1].r) < 1e-4);
  }
}

TEST_CASE("thrust-aligned attitude") {
  for (auto kind : kKinds) {
    for (auto yaw : kYaws) {
      TrajectorySpec s = spec_of(kind, yaw);
      s.thrust_aligned = true;
      s.drag = 0.3;
      const auto truth = generate_trajectory(s);
      const auto imu = derive_imu(truth);
      for (std::size_t i = 0; i < truth.size(); i += 97) {
        const Vec3 thrust = truth[i].a_world - GravityModel{}.g_world + s.drag * truth[i].v;
        const Vec3 body_z = truth[i].r.matrix().col(2);
        CHECK((body_z - thrust.normalized()).norm() < 1e-12);
        const Vec3 expected = Vec3(0, 0, thrust.norm()) -
                              s.drag * (truth[i].r.matrix().transpose() * truth[i].v);
        CHECK((imu[i].a - expected).norm() < 1e-10);
      }
      for (double t = 0.5; t < 9.5; t += 1.3)
        CHECK((fd_body_rate(s, t, 1e-5) - evaluate_trajectory(s, t).w_body).norm() < 1e-6);
    }
  }
}

TEST_CASE("derive_imu examples") {
  TrajectorySample hover;
  const auto imu = derive_imu({hover});
  CHECK((imu[0].a - Vec3(0, 0, 9.80665)).norm() == 0.0);
  CHECK(imu[0].w.norm() == 0.0);

  TrajectorySpec s = spec_of(TrajectoryKind::Circle, YawMode::Fixed);
  s.amplitude = 2.0;
  s.angular_rate = 0.5;
  for (const auto& r : derive_imu(generate_trajectory(s))) {
    CHECK(r.a.head<2>().norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.a.z() == doctest::Approx(9.80665).epsilon(1e-14));
  }
}

TEST_CASE("corrupt_imu with zero noise is the identity") {
  const auto clean = derive_imu(generate_trajectory(spec_of(TrajectoryKind::Figure8, YawMode::Spin)));
  const auto out = corrupt_imu(clean, NoiseSpec{}, 200.0);
  REQUIRE(out.samples.size() == clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    CHECK(out.samples[i].a == clean[i].a);
    CHECK(out.samples[i].w == clean[i].w);
    CHECK(out.samples[i].t == clean[i].t);
  }
}

TEST_CASE("accelerometer white noise scales with the square root of the rate") {
  std::vector<ImuSample> clean(100000);
  for (std::size_t i = 0; i < clean.size(); ++i) clean[i].t = i * 0.005;
  NoiseSpec n;
  n.sigma_a = 0.02;
  n.seed = 11;
  const auto out = corrupt_imu(clean, n, 200.0);
  double sq = 0.0, gyro = 0.0;
  for (const auto& s : out.samples) {
    sq += s.a.squaredNorm();
    gyro += s.w.squaredNorm();
  }
  const double std_emp = std::sqrt(sq / (3.0 * clean.size()));
  CHECK(std::abs(std_emp / (0.02 * std::sqrt(200.0)) - 1.0) < 0.05);
  CHECK(gyro == 0.0);
}

TEST_CASE("corruption is reproducible and preserves stamps") {
  const auto clean = derive_imu(generate_trajectory(spec_of(TrajectoryKind::Circle, YawMode::Spin)));
  NoiseSpec n;
  n.sigma_g = 1e-3;
  n.sigma_a = 1e-2;
  n.sigma_bg = 1e-5;
  n.sigma_ba = 1e-4;
  n.b_a0 = Vec3(0.1, 0, 0);
  n.seed = 7;
  const auto a = corrupt_imu(clean, n, 200.0);
  const auto b = corrupt_imu(clean, n, 200.0);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    CHECK(a.samples[i].a == b.samples[i].a);
    CHECK(a.samples[i].w == b.samples[i].w);
    CHECK(a.samples[i].t == clean[i].t);
  }
  CHECK(a.bias_truth.front().b_a == Vec3(0.1, 0, 0));
  n.seed = 8;
  CHECK(corrupt_imu(clean, n, 200.0).samples[5].a != a.samples[5].a);
}

TEST_CASE("spec validation") {
  TrajectorySpec s;
  s.imu_rate = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = TrajectorySpec{};
  s.duration = -1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = TrajectorySpec{};
  s.amplitude = -1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = TrajectorySpec{};
  s.drag = -0.1;
  CHECK_THROWS_AS(s.validate(), Error);
  NoiseSpec n;
  n.sigma_a = -1;
  CHECK_THROWS_AS(n.validate(), Error);
}
