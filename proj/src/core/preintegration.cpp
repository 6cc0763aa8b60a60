#include "bodyio/preintegration.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "bodyio/error.hpp"

namespace bodyio {

NavState retract(const NavState& x, const Vec15& d) {
  NavState out;
  out.r = exp_so3(d.segment<3>(err::kRot)) * x.r;
  out.v = x.v + d.segment<3>(err::kVel);
  out.p = x.p + d.segment<3>(err::kPos);
  out.b_a = x.b_a + d.segment<3>(err::kBa);
  out.b_g = x.b_g + d.segment<3>(err::kBg);
  return out;
}

Vec15 local_difference(const NavState& a, const NavState& b) {
  Vec15 d;
  d.segment<3>(err::kRot) =
      log_so3(RotationSO3::unchecked(a.r.matrix() * b.r.matrix().transpose()));
  d.segment<3>(err::kVel) = a.v - b.v;
  d.segment<3>(err::kPos) = a.p - b.p;
  d.segment<3>(err::kBa) = a.b_a - b.b_a;
  d.segment<3>(err::kBg) = a.b_g - b.b_g;
  return d;
}

double ErrorCovariance::min_eigenvalue() const {
  const Mat15 sym = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat15> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool ErrorCovariance::valid(double tol) const {
  return P.allFinite() && asymmetry() <= tol && min_eigenvalue() >= -tol;
}

Mat12 noise_covariance(const ProcessNoise& n) {
  Vec12 d;
  d << n.eta_g.array().square(), n.eta_a.array().square(),
      n.eta_bg.array().square(), n.eta_ba.array().square();
  return d.asDiagonal();
}

NavState propagate_state_noisy(const NavState& x, const ImuSample& sample,
                               double dt, const Vec12& n,
                               const GravityModel& g) {
  if (!(dt > 0)) fail(ErrorKind::Argument, "propagate_state: dt must be > 0");
  const Vec3 w = sample.w - x.b_g + n.segment<3>(noise::kGyro);
  const Vec3 a = sample.a - x.b_a + n.segment<3>(noise::kAccel);
  const Vec3 acc = x.r * a + g.g_world;
  NavState out;
  out.r = x.r * exp_so3(w * dt);
  out.v = x.v + acc * dt;
  out.p = x.p + x.v * dt + 0.5 * dt * dt * acc;
  const double sq = std::sqrt(dt);
  out.b_g = x.b_g + sq * n.segment<3>(noise::kGyroWalk);
  out.b_a = x.b_a + sq * n.segment<3>(noise::kAccelWalk);
  return out;
}

NavState propagate_state(const NavState& x, const ImuSample& sample, double dt,
                         const GravityModel& g) {
  if (!(dt > 0)) fail(ErrorKind::Argument, "propagate_state: dt must be > 0");
  const Vec3 a = sample.a - x.b_a;
  const Vec3 acc = x.r * a + g.g_world;
  NavState out = x;
  out.r = x.r * exp_so3((sample.w - x.b_g) * dt);
  out.v = x.v + acc * dt;
  out.p = x.p + x.v * dt + 0.5 * dt * dt * acc;
  return out;
}

PropagationJacobians propagation_jacobians(const NavState& x,
                                           const ImuSample& sample, double dt) {
  if (!(dt > 0)) fail(ErrorKind::Argument, "propagation_jacobians: dt must be > 0");
  const Mat3& r = x.r.matrix();
  const Vec3 ra = r * (sample.a - x.b_a);
  const Mat3 r_jl = r * left_jacobian_so3((sample.w - x.b_g) * dt);
  const Mat3 eye = Mat3::Identity();
  const double half_dt2 = 0.5 * dt * dt;

  PropagationJacobians j;
  j.A.setIdentity();
  j.A.block<3, 3>(err::kRot, err::kBg) = -r_jl * dt;
  j.A.block<3, 3>(err::kVel, err::kRot) = -hat(ra) * dt;
  j.A.block<3, 3>(err::kVel, err::kBa) = -r * dt;
  j.A.block<3, 3>(err::kPos, err::kRot) = -hat(ra) * half_dt2;
  j.A.block<3, 3>(err::kPos, err::kVel) = eye * dt;
  j.A.block<3, 3>(err::kPos, err::kBa) = -r * half_dt2;

  j.B.setZero();
  j.B.block<3, 3>(err::kRot, noise::kGyro) = r_jl * dt;
  j.B.block<3, 3>(err::kVel, noise::kAccel) = r * dt;
  j.B.block<3, 3>(err::kPos, noise::kAccel) = r * half_dt2;
  j.B.block<3, 3>(err::kBg, noise::kGyroWalk) = eye * std::sqrt(dt);
  j.B.block<3, 3>(err::kBa, noise::kAccelWalk) = eye * std::sqrt(dt);
  return j;
}

ErrorCovariance propagate_covariance(const ErrorCovariance& p, const Mat15& a,
                                     const Mat15x12& b, const Mat12& w) {
  const Mat15 m = a * p.P * a.transpose() + b * w * b.transpose();
  return {0.5 * (m + m.transpose())};
}

std::vector<NavState> dead_reckon(const NavState& x0,
                                  const std::vector<ImuSample>& samples,
                                  const CorrectorModel& corrector,
                                  const GravityModel& g) {
  if (samples.empty()) fail(ErrorKind::Argument, "dead_reckon: no samples");
  const ImuWindow window{samples, {}, RepresentationKind::Body};
  const auto corrections = correct_and_quantify(corrector, window);
  std::vector<NavState> out;
  out.reserve(samples.size());
  out.push_back(x0);
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double dt = samples[i + 1].t - samples[i].t;
    out.push_back(propagate_state(
        out.back(), apply_correction(samples[i], corrections[i]), dt, g));
  }
  return out;
}

}  // namespace bodyio
