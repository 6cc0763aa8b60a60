#pragma once

#include <cstdint>
#include <vector>

#include "bodyio/imu.hpp"

namespace bodyio {

enum class TrajectoryKind { Circle, Figure8, Lissajous3D, WaypointSpline };
enum class YawMode { FollowVelocity, Spin, Fixed };

/// Analytic flight profile. Position shapes:
///
///   Circle        A (cos s, sin s, 0)
///   Figure8       A (sin s, sin(2s)/2, 0)
///   Lissajous3D   A (sin s, sin(1.5 s + pi/4), sin(0.5 s)/2)
///   WaypointSpline  natural C2 cubic through `waypoints` (or a default
///                   six-point loop scaled by A) at uniform knot times
///
/// with s = angular_rate * t + phase, all offset by `center`.
///
/// Attitude is Rz(yaw) Ry(pitch) Rx(roll). Roll/pitch oscillate as
/// tilt_amplitude * sin(tilt_rate t) and tilt_amplitude * sin(1.3 tilt_rate t
/// + 0.7); with tilt_amplitude = 0 (default) the attitude is yaw-only.
/// YawMode::Fixed additionally forces the tilt to zero, so the attitude is
/// constant.
///
/// With `thrust_aligned` the tilt fields are ignored and the body z axis
/// follows the thrust a_world - g + drag * v of a multirotor with linear
/// rotor drag, the heading still coming from `yaw_mode`. The accelerometer
/// then reads (0, 0, |thrust|) - drag * R^T v.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Circle;
  double amplitude = 2.0;       // m
  double angular_rate = 0.5;    // rad/s
  YawMode yaw_mode = YawMode::FollowVelocity;
  double spin_rate = 1.0;       // rad/s, YawMode::Spin only
  double duration = 60.0;       // s
  double imu_rate = 200.0;      // Hz
  double phase = 0.0;           // rad
  double yaw0 = 0.0;            // rad, initial yaw for Spin/Fixed
  double tilt_amplitude = 0.0;  // rad
  double tilt_rate = 1.0;       // rad/s
  bool thrust_aligned = false;
  double drag = 0.0;            // 1/s, thrust_aligned only
  Vec3 center = Vec3::Zero();
  std::vector<Vec3> waypoints;

  /// Throws ErrorKind::Config when a field is out of range.
  void validate() const;
};

/// Exact ground truth at one instant.
struct TrajectorySample {
  double t = 0.0;
  RotationSO3 r;
  Vec3 v = Vec3::Zero();        // world, m/s
  Vec3 p = Vec3::Zero();        // world, m
  Vec3 a_world = Vec3::Zero();  // m/s^2
  Vec3 w_body = Vec3::Zero();   // rad/s
};

/// Samples `spec` at t = k / imu_rate for k = 0 .. floor(duration*imu_rate).
std::vector<TrajectorySample> generate_trajectory(const TrajectorySpec& spec);

/// Evaluates the profile at an arbitrary time (used for finite-difference
/// checks and interpolation-free resampling).
TrajectorySample evaluate_trajectory(const TrajectorySpec& spec, double t);

/// Noiseless, bias-free IMU readings of a trajectory.
std::vector<ImuSample> derive_imu(const std::vector<TrajectorySample>& samples,
                                  const GravityModel& g = {});

/// Continuous-time noise densities. A sensor sampled at rate f gets
/// discrete white noise with std sigma * sqrt(f); biases random-walk with
/// per-step std sigma_b * sqrt(dt).
struct NoiseSpec {
  double sigma_g = 0.0;   // rad/s/sqrt(Hz)
  double sigma_a = 0.0;   // m/s^2/sqrt(Hz)
  double sigma_bg = 0.0;  // rad/s^2/sqrt(Hz)
  double sigma_ba = 0.0;  // m/s^3/sqrt(Hz)
  Vec3 b_g0 = Vec3::Zero();
  Vec3 b_a0 = Vec3::Zero();
  std::uint64_t seed = 0;

  void validate() const;
};

struct BiasState {
  Vec3 b_g = Vec3::Zero();
  Vec3 b_a = Vec3::Zero();
};

struct CorruptedImu {
  std::vector<ImuSample> samples;
  std::vector<BiasState> bias_truth;  // bias active at each sample
};

/// Adds biases and white noise. Per sample, draws happen in the order:
/// gyro noise xyz, accel noise xyz, gyro bias step xyz, accel bias step xyz,
/// all from one Rng(noise.seed). Timestamps are copied unchanged.
CorruptedImu corrupt_imu(const std::vector<ImuSample>& clean,
                         const NoiseSpec& noise, double imu_rate);

}  // namespace bodyio
