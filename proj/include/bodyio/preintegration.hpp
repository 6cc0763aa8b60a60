#pragma once

#include <Eigen/Core>
#include <vector>

#include "bodyio/corrector.hpp"
#include "bodyio/imu.hpp"

namespace bodyio {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat15x12 = Eigen::Matrix<double, 15, 12>;

/// Offsets of the 3-blocks in the 15-dim error state.
namespace err {
inline constexpr int kRot = 0;
inline constexpr int kVel = 3;
inline constexpr int kPos = 6;
inline constexpr int kBa = 9;
inline constexpr int kBg = 12;
}  // namespace err

/// Offsets of the 3-blocks in the 12-dim noise vector (n_g, n_a, n_bg, n_ba).
namespace noise {
inline constexpr int kGyro = 0;
inline constexpr int kAccel = 3;
inline constexpr int kGyroWalk = 6;
inline constexpr int kAccelWalk = 9;
}  // namespace noise

struct NavState {
  RotationSO3 r;                // body -> world
  Vec3 v = Vec3::Zero();        // world
  Vec3 p = Vec3::Zero();        // world
  Vec3 b_a = Vec3::Zero();
  Vec3 b_g = Vec3::Zero();
};

/// x (+) d: R <- Exp(d_rot) R, all other blocks additive.
NavState retract(const NavState& x, const Vec15& d);

/// a (-) b, the d with b (+) d == a (rotation block log(R_a R_b^T)).
Vec15 local_difference(const NavState& a, const NavState& b);

/// 15x15 covariance over (dxi, dv, dp, dba, dbg).
struct ErrorCovariance {
  Mat15 P = Mat15::Zero();

  double asymmetry() const { return (P - P.transpose()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const;
  /// Symmetric within `tol` and min eigenvalue >= -tol.
  bool valid(double tol = 1e-9) const;
};

/// Per-sample sensor stds plus continuous bias random-walk densities.
struct ProcessNoise {
  Vec3 eta_g = Vec3::Constant(1e-2);   // rad/s
  Vec3 eta_a = Vec3::Constant(1e-1);   // m/s^2
  Vec3 eta_bg = Vec3::Constant(1e-5);  // rad/s^2/sqrt(Hz)
  Vec3 eta_ba = Vec3::Constant(1e-4);  // m/s^3/sqrt(Hz)
};

/// W = diag(eta_g^2, eta_a^2, eta_bg^2, eta_ba^2).
Mat12 noise_covariance(const ProcessNoise& n);

/// One Euler step on a corrected sample:
///   R' = R Exp((w - b_g) dt)
///   v' = v + (R (a - b_a) + g) dt
///   p' = p + v dt + dt^2/2 (R (a - b_a) + g)
NavState propagate_state(const NavState& x, const ImuSample& sample, double dt,
                         const GravityModel& g = {});

/// The same step with injected noise n = (n_g, n_a, n_bg, n_ba): n_g and n_a
/// add to the bias-compensated readings, biases move by sqrt(dt) n_b.
/// With n = 0 this equals propagate_state().
NavState propagate_state_noisy(const NavState& x, const ImuSample& sample,
                               double dt, const Vec12& n,
                               const GravityModel& g = {});

struct PropagationJacobians {
  Mat15 A;
  Mat15x12 B;
};

/// Linearization of propagate_state_noisy() around (x, n = 0) in the
/// left-perturbation error state, so that
///   propagate(x (+) d, n) (-) propagate(x, 0) ~= A d + B n.
/// With a = a_hat - b_a, theta = (w_hat - b_g) dt and Jl the left Jacobian:
///   A[rot, bg] = -R Jl(theta) dt
///   A[vel, rot] = -[R a]x dt        A[vel, ba] = -R dt
///   A[pos, rot] = -[R a]x dt^2/2    A[pos, vel] = I dt   A[pos, ba] = -R dt^2/2
///   B[rot, n_g] = R Jl(theta) dt    B[vel, n_a] = R dt   B[pos, n_a] = R dt^2/2
///   B[ba, n_ba] = B[bg, n_bg] = I sqrt(dt)
/// and identity on the remaining diagonal blocks of A.
PropagationJacobians propagation_jacobians(const NavState& x,
                                           const ImuSample& sample, double dt);

/// A P A^T + B W B^T, re-symmetrized.
ErrorCovariance propagate_covariance(const ErrorCovariance& p, const Mat15& a,
                                     const Mat15x12& b, const Mat12& w);

/// Open-loop integration over corrected samples. Returns one state per
/// sample; entry 0 is x0 at samples[0].t, entry k is the state at
/// samples[k].t after integrating samples 0..k-1.
std::vector<NavState> dead_reckon(const NavState& x0,
                                  const std::vector<ImuSample>& samples,
                                  const CorrectorModel& corrector,
                                  const GravityModel& g = {});

}  // namespace bodyio
