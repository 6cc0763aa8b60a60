#pragma once

#include <Eigen/Core>

namespace bodyio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Element of SO(3) stored as an orthonormal 3x3 matrix with det = +1.
///
/// Construction through from_matrix() validates the invariants; the
/// unchecked constructor is reserved for results of exp() and products of
/// valid rotations.
class RotationSO3 {
 public:
  RotationSO3() : m_(Mat3::Identity()) {}

  static RotationSO3 identity() { return RotationSO3(); }

  /// Validates orthonormality (Frobenius of m*m^T - I and |det - 1|) at
  /// `tol`; throws ErrorKind::Numerical on failure.
  static RotationSO3 from_matrix(const Mat3& m, double tol = 1e-6);

  /// Wraps `m` without validation.
  static RotationSO3 unchecked(const Mat3& m) { return RotationSO3(m); }

  /// Unit quaternion (w, x, y, z), Hamilton convention.
  static RotationSO3 from_quaternion(double w, double x, double y, double z);

  const Mat3& matrix() const { return m_; }
  RotationSO3 inverse() const { return RotationSO3(m_.transpose()); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  RotationSO3 operator*(const RotationSO3& o) const {
    return RotationSO3(m_ * o.m_);
  }

  /// Hamilton (w, x, y, z) with w >= 0.
  Eigen::Vector4d quaternion() const;

  /// Re-orthonormalize via SVD projection; used after long product chains.
  RotationSO3 normalized() const;

 private:
  explicit RotationSO3(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// so(3) tangent vector (axis * angle, radians).
using TangentSO3 = Vec3;

/// Skew-symmetric matrix with hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Inverse of hat() on the skew-symmetric part of m.
Vec3 vee(const Mat3& m);

RotationSO3 exp_so3(const TangentSO3& xi);

/// Principal logarithm, |result| <= pi. Throws ErrorKind::Numerical when
/// `r` is not a rotation within 1e-6.
TangentSO3 log_so3(const RotationSO3& r);

/// Right Jacobian of SO(3): Exp(xi + d) ~= Exp(xi) Exp(Jr(xi) d).
Mat3 right_jacobian_so3(const TangentSO3& xi);

/// Left Jacobian: Exp(xi + d) ~= Exp(Jl(xi) d) Exp(xi).
Mat3 left_jacobian_so3(const TangentSO3& xi);

/// Geodesic angle between two rotations.
double geodesic_distance(const RotationSO3& a, const RotationSO3& b);

/// Rotation about the z axis by `yaw` radians.
RotationSO3 rot_z(double yaw);
RotationSO3 rot_x(double roll);
RotationSO3 rot_y(double pitch);

}  // namespace bodyio
