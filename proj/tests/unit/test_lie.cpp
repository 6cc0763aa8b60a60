#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "bodyio/error.hpp"
#include "bodyio/lie.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bodyio;

namespace {

Mat3 series_exp(const Vec3& xi, int terms) {
  const Mat3 h = hat(xi);
  Mat3 sum = Mat3::Identity();
  Mat3 power = Mat3::Identity();
  double fact = 1.0;
  for (int k = 1; k < terms; ++k) {
    power = power * h;
    fact *= k;
    sum += power / fact;
  }
  return sum;
}

// The 12-term series is only accurate to ~1e-9 at |xi| = 1, so the oracle
// sums it at xi / 4 and squares twice.
Mat3 scaled_series_exp(const Vec3& xi) {
  const Mat3 quarter = series_exp(xi / 4.0, 12);
  return (quarter * quarter) * (quarter * quarter);
}

}  // namespace

TEST_CASE("hat of zero and of the z axis") {
  CHECK(hat(Vec3::Zero()).isZero(0.0));
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  CHECK(hat(Vec3::UnitZ()) == expected);
}

TEST_CASE("hat matches the cross product and is skew") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = test::random_vec(rng, 5), w = test::random_vec(rng, 5);
    const Vec3 cross(v.y() * w.z() - v.z() * w.y(), v.z() * w.x() - v.x() * w.z(),
                     v.x() * w.y() - v.y() * w.x());
    CHECK((hat(v) * w - cross).norm() < 1e-14);
    CHECK((hat(v).transpose() + hat(v)).isZero(0.0));
    CHECK((vee(hat(v)) - v).norm() == 0.0);
  }
}

TEST_CASE("hat is linear") {
  Rng rng(2);
  const Vec3 a = test::random_vec(rng), b = test::random_vec(rng);
  const double alpha = 0.7, beta = -1.3;
  CHECK((hat(alpha * a + beta * b) - (alpha * hat(a) + beta * hat(b))).norm() < 1e-15);
}

TEST_CASE("exp of zero and a quarter turn") {
  CHECK(exp_so3(Vec3::Zero()).matrix().isIdentity(0.0));
  const Vec3 x = exp_so3(Vec3(0, 0, std::numbers::pi / 2)) * Vec3::UnitX();
  CHECK((x - Vec3::UnitY()).norm() < 1e-15);
}

TEST_CASE("exp agrees with the matrix power series") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 xi = test::random_vec(rng).normalized() * 0.3;
    CHECK((exp_so3(xi).matrix() - series_exp(xi, 12)).cwiseAbs().maxCoeff() < 1e-14);
  }
  for (int i = 0; i < 200; ++i) {
    const Vec3 xi = test::random_vec(rng).normalized() * rng.uniform(0.0, 1.0);
    CHECK((exp_so3(xi).matrix() - scaled_series_exp(xi)).cwiseAbs().maxCoeff() < 1e-10);
  }
  // Small-angle branch.
  const Vec3 tiny(3e-7, -2e-7, 1e-7);
  CHECK((exp_so3(tiny).matrix() - series_exp(tiny, 6)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("exp output is a rotation") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Mat3 m = exp_so3(test::random_vec(rng, 10)).matrix();
    CHECK((m * m.transpose() - Mat3::Identity()).norm() < 1e-12);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("log of identity and round trips") {
  CHECK(log_so3(RotationSO3()).norm() == 0.0);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 xi =
        test::random_vec(rng).normalized() * rng.uniform(1e-9, std::numbers::pi - 0.01);
    CHECK((log_so3(exp_so3(xi)) - xi).norm() < 1e-8);
    const RotationSO3 r = exp_so3(xi);
    CHECK((exp_so3(log_so3(r)).matrix() - r.matrix()).norm() < 1e-8);
  }
}

TEST_CASE("log near pi") {
  const double angle = std::numbers::pi - 1e-4;
  const Vec3 xi = log_so3(rot_z(angle));
  CHECK((xi - Vec3(0, 0, angle)).norm() < 1e-6);
  // Exactly pi: largest axis component is nonnegative.
  const Vec3 half = log_so3(exp_so3(Vec3(0, -std::numbers::pi, 0)));
  CHECK(half.y() == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(log_so3(exp_so3(Vec3(1, 2, 2) / 3 * 3.5)).norm() <= std::numbers::pi);
}

TEST_CASE("log rejects a non-rotation") {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 1.1;
  CHECK_THROWS_AS(RotationSO3::from_matrix(m), Error);
  try {
    (void)log_so3(RotationSO3::unchecked(m));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
  }
}

TEST_CASE("one-parameter subgroup") {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a = test::random_vec(rng, 1.5);
    CHECK(((exp_so3(a) * exp_so3(a)).matrix() - exp_so3(2 * a).matrix()).norm() < 1e-9);
  }
}

TEST_CASE("left and right Jacobians match finite differences") {
  Rng rng(7);
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const Vec3 xi = test::random_vec(rng, 1.2);
    Mat3 fd_left, fd_right;
    for (int k = 0; k < 3; ++k) {
      const Vec3 d = Vec3::Unit(k) * h;
      fd_left.col(k) = (log_so3(exp_so3(xi + d) * exp_so3(xi).inverse()) -
                        log_so3(exp_so3(xi - d) * exp_so3(xi).inverse())) /
                       (2 * h);
      fd_right.col(k) = (log_so3(exp_so3(xi).inverse() * exp_so3(xi + d)) -
                         log_so3(exp_so3(xi).inverse() * exp_so3(xi - d))) /
                        (2 * h);
    }
    CHECK((left_jacobian_so3(xi) - fd_left).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((right_jacobian_so3(xi) - fd_right).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("quaternion conversion round trip") {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const RotationSO3 r = test::random_rotation(rng);
    const Eigen::Vector4d q = r.quaternion();
    CHECK(q[0] >= 0.0);
    CHECK(std::abs(q.norm() - 1.0) < 1e-12);
    CHECK((RotationSO3::from_quaternion(q[0], q[1], q[2], q[3]).matrix() - r.matrix()).norm() <
          1e-12);
  }
  // 90 degree yaw.
  const Eigen::Vector4d q = rot_z(std::numbers::pi / 2).quaternion();
  CHECK(q[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(q[3] == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("geodesic distance") {
  CHECK(geodesic_distance(rot_z(0.3), rot_z(-0.2)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(geodesic_distance(rot_x(1.0), rot_x(1.0)) == doctest::Approx(0.0));
}
