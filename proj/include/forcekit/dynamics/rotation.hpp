#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace forcekit::dynamics {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

/// Rotation matrix for a rotation-vector coordinate r (angle = |r|).
/// Small angles are expanded in series so the map stays smooth through r = 0.
inline Eigen::Matrix3d exp_so3(const Eigen::Vector3d& r) {
  const double theta2 = r.squaredNorm();
  const double theta = std::sqrt(theta2);
  double s1, s2;  // sin(t)/t, (1-cos(t))/t^2
  if (theta < 1e-4) {
    s1 = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    s2 = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    s1 = std::sin(theta) / theta;
    const double half_sin = std::sin(0.5 * theta);
    s2 = 2.0 * half_sin * half_sin / theta2;
  }
  const Eigen::Matrix3d rx = skew(r);
  return Eigen::Matrix3d::Identity() + s1 * rx + s2 * rx * rx;
}

/// Rotation by `angle` about a unit axis (Rodrigues form).
inline Eigen::Matrix3d rotation_about_axis(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

/// Right Jacobian of the exponential map: the body-frame angular velocity of
/// R(t) = exp_so3(r(t)) is Jr(r) * rdot.
inline Eigen::Matrix3d right_jacobian_so3(const Eigen::Vector3d& r) {
  const double theta2 = r.squaredNorm();
  const double theta = std::sqrt(theta2);
  double c1, c2;  // (1-cos t)/t^2, (t - sin t)/t^3
  if (theta < 0.1) {
    const double t4 = theta2 * theta2;
    c1 = 0.5 - theta2 / 24.0 + t4 / 720.0 - t4 * theta2 / 40320.0;
    c2 = 1.0 / 6.0 - theta2 / 120.0 + t4 / 5040.0 - t4 * theta2 / 362880.0;
  } else {
    const double half_sin = std::sin(0.5 * theta);
    c1 = 2.0 * half_sin * half_sin / theta2;
    c2 = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Eigen::Matrix3d rx = skew(r);
  return Eigen::Matrix3d::Identity() - c1 * rx + c2 * rx * rx;
}

/// Time derivative of right_jacobian_so3 along r(t) with velocity rdot.
inline Eigen::Matrix3d right_jacobian_dot_so3(const Eigen::Vector3d& r,
                                              const Eigen::Vector3d& rdot) {
  const double theta2 = r.squaredNorm();
  const double theta = std::sqrt(theta2);
  double c1, c2;  // as in right_jacobian_so3
  double d1, d2;  // c1'(t)/t, c2'(t)/t
  if (theta < 0.05) {
    const double t4 = theta2 * theta2;
    c1 = 0.5 - theta2 / 24.0 + t4 / 720.0 - t4 * theta2 / 40320.0;
    c2 = 1.0 / 6.0 - theta2 / 120.0 + t4 / 5040.0 - t4 * theta2 / 362880.0;
    d1 = -1.0 / 12.0 + theta2 / 180.0 - t4 / 6720.0 + t4 * theta2 / 453600.0;
    d2 = -1.0 / 60.0 + theta2 / 1260.0 - t4 / 60480.0;
  } else {
    const double half_sin = std::sin(0.5 * theta);
    const double sin_t = std::sin(theta);
    const double one_minus_cos = 2.0 * half_sin * half_sin;
    c1 = one_minus_cos / theta2;
    c2 = (theta - sin_t) / (theta2 * theta);
    d1 = (theta * sin_t - 2.0 * one_minus_cos) / (theta2 * theta2);
    d2 = (theta * one_minus_cos - 3.0 * (theta - sin_t)) / (theta2 * theta2 * theta);
  }
  const double r_dot_rdot = r.dot(rdot);
  const Eigen::Matrix3d rx = skew(r);
  const Eigen::Matrix3d vx = skew(rdot);
  return -d1 * r_dot_rdot * rx - c1 * vx + d2 * r_dot_rdot * rx * rx +
         c2 * (vx * rx + rx * vx);
}

}  // namespace forcekit::dynamics
