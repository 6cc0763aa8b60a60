#include "bodyio/lie.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bodyio/error.hpp"

namespace bodyio {

namespace {

constexpr double kSmallAngle = 1e-6;
// Above this angle the axis comes from the symmetric part of R.
constexpr double kNearPi = std::numbers::pi - 1e-3;

double orthonormality_defect(const Mat3& m) {
  return (m * m.transpose() - Mat3::Identity()).norm();
}

}  // namespace

RotationSO3 RotationSO3::from_matrix(const Mat3& m, double tol) {
  const double defect = orthonormality_defect(m);
  const double det_err = std::abs(m.determinant() - 1.0);
  if (!m.allFinite() || defect > tol || det_err > tol) {
    std::ostringstream os;
    os << "invalid rotation: orthonormality defect " << defect
       << ", det error " << det_err;
    fail(ErrorKind::Numerical, os.str());
  }
  return RotationSO3(m);
}

RotationSO3 RotationSO3::from_quaternion(double w, double x, double y,
                                         double z) {
  Eigen::Quaterniond q(w, x, y, z);
  q.normalize();
  return RotationSO3(q.toRotationMatrix());
}

Eigen::Vector4d RotationSO3::quaternion() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1.0;
  return {q.w(), q.x(), q.y(), q.z()};
}

RotationSO3 RotationSO3::normalized() const {
  Eigen::JacobiSVD<Mat3> svd(m_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return RotationSO3(r);
}

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  return {0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
          0.5 * (m(1, 0) - m(0, 1))};
}

RotationSO3 exp_so3(const TangentSO3& xi) {
  const double theta2 = xi.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 k = hat(xi);
  double a;
  double b;
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return RotationSO3::unchecked(Mat3::Identity() + a * k + b * k * k);
}

TangentSO3 log_so3(const RotationSO3& rot) {
  const Mat3& r = rot.matrix();
  if (!r.allFinite() || orthonormality_defect(r) > 1e-6 ||
      std::abs(r.determinant() - 1.0) > 1e-6) {
    fail(ErrorKind::Numerical, "log_so3: input is not a rotation matrix");
  }
  // vee(R - R^T) / 2 = sin(theta) * axis
  const Vec3 s = vee(r);
  const double sin_theta = s.norm();
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < kSmallAngle) {
    return s * (1.0 + theta * theta / 6.0);
  }
  if (theta < kNearPi) {
    return s * (theta / sin_theta);
  }

  // (R + R^T)/2 = cos(theta) I + (1 - cos(theta)) n n^T
  const Mat3 outer =
      (0.5 * (r + r.transpose()) - cos_theta * Mat3::Identity()) /
      (1.0 - cos_theta);
  int k = 0;
  outer.diagonal().maxCoeff(&k);
  Vec3 axis = outer.col(k) / std::sqrt(std::max(outer(k, k), 1e-300));
  axis.normalize();
  const double dir = axis.dot(s);
  if (std::abs(dir) > 1e-12) {
    if (dir < 0) axis = -axis;
  } else {
    int big = 0;
    axis.cwiseAbs().maxCoeff(&big);
    if (axis(big) < 0) axis = -axis;
  }
  return axis * theta;
}

Mat3 right_jacobian_so3(const TangentSO3& xi) {
  const double theta2 = xi.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 k = hat(xi);
  if (theta < 1e-4) {
    return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  }
  return Mat3::Identity() - (1.0 - std::cos(theta)) / theta2 * k +
         (theta - std::sin(theta)) / (theta2 * theta) * k * k;
}

Mat3 left_jacobian_so3(const TangentSO3& xi) {
  return right_jacobian_so3(-xi);
}

double geodesic_distance(const RotationSO3& a, const RotationSO3& b) {
  const Mat3 d = a.matrix().transpose() * b.matrix();
  const double c = std::clamp(0.5 * (d.trace() - 1.0), -1.0, 1.0);
  return std::atan2(vee(d).norm(), c);
}

RotationSO3 rot_z(double yaw) { return exp_so3(Vec3(0, 0, yaw)); }
RotationSO3 rot_x(double roll) { return exp_so3(Vec3(roll, 0, 0)); }
RotationSO3 rot_y(double pitch) { return exp_so3(Vec3(0, pitch, 0)); }

}  // namespace bodyio
