#include "bodyio/simulator.hpp"

#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "bodyio/error.hpp"
#include "bodyio/random.hpp"

namespace bodyio {

namespace {

struct Kinematics {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Vec3 j = Vec3::Zero();  // jerk
};

// amp * sin(freq * s + offset), s = rate * t + phase
struct Term {
  double amp;
  double freq;
  double offset;
};

void accumulate(const Term& term, double s, double rate, int axis,
                Kinematics& k) {
  const double arg = term.freq * s + term.offset;
  const double f = term.freq * rate;
  k.p[axis] += term.amp * std::sin(arg);
  k.v[axis] += term.amp * f * std::cos(arg);
  k.a[axis] -= term.amp * f * f * std::sin(arg);
  k.j[axis] -= term.amp * f * f * f * std::cos(arg);
}

std::vector<Vec3> default_waypoints(double amp) {
  return {Vec3(amp, 0, 0),
          Vec3(0.5 * amp, amp, 0.3 * amp),
          Vec3(-0.5 * amp, 0.8 * amp, 0.5 * amp),
          Vec3(-amp, 0, 0.2 * amp),
          Vec3(-0.3 * amp, -amp, -0.2 * amp),
          Vec3(0.6 * amp, -0.7 * amp, 0)};
}

// Natural cubic spline second derivatives for uniform knot spacing h.
std::vector<Vec3> spline_moments(const std::vector<Vec3>& y, double h) {
  const std::size_t n = y.size();
  std::vector<Vec3> m(n, Vec3::Zero());
  if (n < 3) return m;
  // Thomas algorithm on h M_{k-1} + 4h M_k + h M_{k+1} = 6 (y_{k+1} - 2y_k + y_{k-1}) / h
  const std::size_t inner = n - 2;
  std::vector<double> c(inner, 0.0);
  std::vector<Vec3> d(inner, Vec3::Zero());
  for (std::size_t i = 0; i < inner; ++i) {
    const std::size_t k = i + 1;
    const Vec3 rhs = 6.0 * (y[k + 1] - 2.0 * y[k] + y[k - 1]) / (h * h);
    const double diag = 4.0 - (i > 0 ? c[i - 1] : 0.0);
    c[i] = 1.0 / diag;
    d[i] = (rhs - (i > 0 ? d[i - 1] : Vec3::Zero())) / diag;
  }
  for (std::size_t i = inner; i-- > 0;) {
    const Vec3 next = (i + 1 < inner) ? m[i + 2] : Vec3::Zero();
    m[i + 1] = d[i] - c[i] * next;
  }
  return m;
}

Kinematics spline_kinematics(const TrajectorySpec& spec, double t) {
  const std::vector<Vec3> pts =
      spec.waypoints.empty() ? default_waypoints(spec.amplitude) : spec.waypoints;
  const std::size_t n = pts.size();
  const double h = spec.duration / static_cast<double>(n - 1);
  const std::vector<Vec3> m = spline_moments(pts, h);
  std::size_t k = static_cast<std::size_t>(std::floor(t / h));
  if (k >= n - 1) k = n - 2;
  const double a = (static_cast<double>(k) + 1.0) * h - t;  // t_{k+1} - t
  const double b = t - static_cast<double>(k) * h;          // t - t_k
  const Vec3& y0 = pts[k];
  const Vec3& y1 = pts[k + 1];
  const Vec3& m0 = m[k];
  const Vec3& m1 = m[k + 1];
  Kinematics out;
  out.p = m0 * (a * a * a) / (6 * h) + m1 * (b * b * b) / (6 * h) +
          (y0 / h - m0 * h / 6) * a + (y1 / h - m1 * h / 6) * b;
  out.v = -m0 * (a * a) / (2 * h) + m1 * (b * b) / (2 * h) -
          (y0 / h - m0 * h / 6) + (y1 / h - m1 * h / 6);
  out.a = m0 * a / h + m1 * b / h;
  out.j = (m1 - m0) / h;
  return out;
}

Kinematics translational(const TrajectorySpec& spec, double t) {
  const double s = spec.angular_rate * t + spec.phase;
  const double w = spec.angular_rate;
  const double amp = spec.amplitude;
  constexpr double half_pi = std::numbers::pi / 2;
  Kinematics k;
  switch (spec.kind) {
    case TrajectoryKind::Circle:
      accumulate({amp, 1.0, half_pi}, s, w, 0, k);
      accumulate({amp, 1.0, 0.0}, s, w, 1, k);
      break;
    case TrajectoryKind::Figure8:
      accumulate({amp, 1.0, 0.0}, s, w, 0, k);
      accumulate({0.5 * amp, 2.0, 0.0}, s, w, 1, k);
      break;
    case TrajectoryKind::Lissajous3D:
      accumulate({amp, 1.0, 0.0}, s, w, 0, k);
      accumulate({amp, 1.5, std::numbers::pi / 4}, s, w, 1, k);
      accumulate({0.5 * amp, 0.5, 0.0}, s, w, 2, k);
      break;
    case TrajectoryKind::WaypointSpline:
      k = spline_kinematics(spec, t);
      break;
  }
  k.p += spec.center;
  return k;
}

// Attitude whose body z axis follows the thrust direction
// f = a - g + drag * v, with heading `yaw`. Returns R and its body rate.
std::pair<RotationSO3, Vec3> thrust_attitude(const Kinematics& k, double drag,
                                             double yaw, double yaw_rate,
                                             const GravityModel& g) {
  const Vec3 f = k.a - g.g_world + drag * k.v;
  const Vec3 f_dot = k.j + drag * k.a;
  const double fn = f.norm();
  if (fn < 1e-6) fail(ErrorKind::Numerical, "thrust-aligned attitude: zero thrust");
  const Vec3 zb = f / fn;
  const Vec3 zb_dot = (f_dot - zb * zb.dot(f_dot)) / fn;
  const Vec3 xc(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 xc_dot = yaw_rate * Vec3(-std::sin(yaw), std::cos(yaw), 0.0);
  const Vec3 y = zb.cross(xc);
  const double yn = y.norm();
  if (yn < 1e-6) fail(ErrorKind::Numerical, "thrust-aligned attitude: heading along thrust");
  const Vec3 yb = y / yn;
  const Vec3 y_dot = zb_dot.cross(xc) + zb.cross(xc_dot);
  const Vec3 yb_dot = (y_dot - yb * yb.dot(y_dot)) / yn;
  const Vec3 xb = yb.cross(zb);
  const Vec3 xb_dot = yb_dot.cross(zb) + yb.cross(zb_dot);
  Mat3 r, r_dot;
  r << xb, yb, zb;
  r_dot << xb_dot, yb_dot, zb_dot;
  const Mat3 omega = r.transpose() * r_dot;
  return {RotationSO3::unchecked(r), 0.5 * vee(omega - omega.transpose())};
}

}  // namespace

void TrajectorySpec::validate() const {
  if (!(imu_rate > 0)) fail(ErrorKind::Config, "simulator.imu_rate must be > 0");
  if (!(duration > 0)) fail(ErrorKind::Config, "simulator.duration must be > 0");
  if (!(amplitude >= 0)) {
    fail(ErrorKind::Config, "simulator.amplitude must be >= 0");
  }
  if (!(drag >= 0)) fail(ErrorKind::Config, "simulator.drag must be >= 0");
  if (kind == TrajectoryKind::WaypointSpline && !waypoints.empty() &&
      waypoints.size() < 2) {
    fail(ErrorKind::Config, "simulator.waypoints needs at least 2 points");
  }
}

TrajectorySample evaluate_trajectory(const TrajectorySpec& spec, double t) {
  const Kinematics k = translational(spec, t);

  double yaw = spec.yaw0;
  double yaw_rate = 0.0;
  switch (spec.yaw_mode) {
    case YawMode::FollowVelocity: {
      const double speed2 = k.v.x() * k.v.x() + k.v.y() * k.v.y();
      yaw = std::atan2(k.v.y(), k.v.x());
      // Hovering in xy leaves the heading undefined; hold the rate at zero.
      if (speed2 > 1e-12) {
        yaw_rate = (k.v.x() * k.a.y() - k.v.y() * k.a.x()) / speed2;
      }
      break;
    }
    case YawMode::Spin:
      yaw = spec.yaw0 + spec.spin_rate * t;
      yaw_rate = spec.spin_rate;
      break;
    case YawMode::Fixed:
      break;
  }

  TrajectorySample out;
  out.t = t;
  out.p = k.p;
  out.v = k.v;
  out.a_world = k.a;
  if (spec.thrust_aligned) {
    const auto [r, w] = thrust_attitude(k, spec.drag, yaw, yaw_rate, GravityModel{});
    out.r = r;
    out.w_body = w;
    return out;
  }

  double roll = 0.0, pitch = 0.0, roll_rate = 0.0, pitch_rate = 0.0;
  if (spec.yaw_mode != YawMode::Fixed && spec.tilt_amplitude != 0.0) {
    const double a = spec.tilt_amplitude;
    const double f = spec.tilt_rate;
    roll = a * std::sin(f * t);
    roll_rate = a * f * std::cos(f * t);
    pitch = a * std::sin(1.3 * f * t + 0.7);
    pitch_rate = a * 1.3 * f * std::cos(1.3 * f * t + 0.7);
  }

  const RotationSO3 rz = rot_z(yaw);
  const RotationSO3 ry = rot_y(pitch);
  const RotationSO3 rx = rot_x(roll);

  out.r = rz * ry * rx;
  // Body rate of R = Rz Ry Rx.
  const Mat3 rx_t = rx.matrix().transpose();
  const Mat3 ry_t = ry.matrix().transpose();
  out.w_body = rx_t * ry_t * Vec3(0, 0, yaw_rate) + rx_t * Vec3(0, pitch_rate, 0) +
               Vec3(roll_rate, 0, 0);
  return out;
}

std::vector<TrajectorySample> generate_trajectory(const TrajectorySpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(
      std::floor(spec.duration * spec.imu_rate + 1e-9)) + 1;
  std::vector<TrajectorySample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(
        evaluate_trajectory(spec, static_cast<double>(i) / spec.imu_rate));
  }
  return out;
}

std::vector<ImuSample> derive_imu(const std::vector<TrajectorySample>& samples,
                                  const GravityModel& g) {
  std::vector<ImuSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back({s.t, s.w_body, specific_force(s.a_world, s.r, g)});
  }
  return out;
}

void NoiseSpec::validate() const {
  if (sigma_g < 0 || sigma_a < 0 || sigma_bg < 0 || sigma_ba < 0) {
    fail(ErrorKind::Config, "noise sigmas must be >= 0");
  }
  if (!b_g0.allFinite() || !b_a0.allFinite()) {
    fail(ErrorKind::Config, "noise initial biases must be finite");
  }
}

CorruptedImu corrupt_imu(const std::vector<ImuSample>& clean,
                         const NoiseSpec& noise, double imu_rate) {
  noise.validate();
  if (!(imu_rate > 0)) fail(ErrorKind::Argument, "imu_rate must be > 0");
  const double dt = 1.0 / imu_rate;
  const double sd_g = noise.sigma_g * std::sqrt(imu_rate);
  const double sd_a = noise.sigma_a * std::sqrt(imu_rate);
  const double sd_bg = noise.sigma_bg * std::sqrt(dt);
  const double sd_ba = noise.sigma_ba * std::sqrt(dt);

  Rng rng(noise.seed);
  auto draw = [&rng](double sd) {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = sd * rng.normal();
    return v;
  };

  CorruptedImu out;
  out.samples.reserve(clean.size());
  out.bias_truth.reserve(clean.size());
  BiasState bias{noise.b_g0, noise.b_a0};
  for (const auto& s : clean) {
    const Vec3 ng = draw(sd_g);
    const Vec3 na = draw(sd_a);
    out.samples.push_back({s.t, s.w + bias.b_g + ng, s.a + bias.b_a + na});
    out.bias_truth.push_back(bias);
    bias.b_g += draw(sd_bg);
    bias.b_a += draw(sd_ba);
  }
  return out;
}

}  // namespace bodyio
