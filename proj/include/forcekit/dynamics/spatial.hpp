#pragma once

#include <Eigen/Dense>

#include "forcekit/dynamics/rotation.hpp"

namespace forcekit::dynamics {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Spatial (Plücker) vectors are ordered [angular; linear].

/// Coordinate transform between two frames: E rotates parent-frame vectors
/// into the child frame, r is the child origin expressed in the parent frame.
struct SpatialTransform {
  Eigen::Matrix3d rotation;     // E
  Eigen::Vector3d translation;  // r

  Vec6 apply_motion(const Vec6& m) const {
    Vec6 out;
    const Eigen::Vector3d w = m.head<3>();
    out.head<3>() = rotation * w;
    out.tail<3>() = rotation * (m.tail<3>() - translation.cross(w));
    return out;
  }

  /// Transforms a force expressed in the child frame back to the parent
  /// frame (the transpose of the motion map).
  Vec6 transpose_apply_force(const Vec6& f) const {
    Vec6 out;
    const Eigen::Vector3d n = rotation.transpose() * f.head<3>();
    const Eigen::Vector3d lin = rotation.transpose() * f.tail<3>();
    out.head<3>() = n + translation.cross(lin);
    out.tail<3>() = lin;
    return out;
  }

  Mat6 motion_matrix() const {
    Mat6 x = Mat6::Zero();
    x.topLeftCorner<3, 3>() = rotation;
    x.bottomRightCorner<3, 3>() = rotation;
    x.bottomLeftCorner<3, 3>() = -rotation * skew(translation);
    return x;
  }
};

inline Vec6 cross_motion(const Vec6& v, const Vec6& m) {
  Vec6 out;
  const Eigen::Vector3d w = v.head<3>();
  const Eigen::Vector3d lin = v.tail<3>();
  out.head<3>() = w.cross(m.head<3>());
  out.tail<3>() = w.cross(m.tail<3>()) + lin.cross(m.head<3>());
  return out;
}

inline Vec6 cross_force(const Vec6& v, const Vec6& f) {
  Vec6 out;
  const Eigen::Vector3d w = v.head<3>();
  const Eigen::Vector3d lin = v.tail<3>();
  out.head<3>() = w.cross(f.head<3>()) + lin.cross(f.tail<3>());
  out.tail<3>() = w.cross(f.tail<3>());
  return out;
}

/// Rigid-body inertia referred to the link frame origin.
struct SpatialInertia {
  Eigen::Matrix3d moment;      // inertia about the frame origin
  Eigen::Vector3d first_mass;  // mass * com
  double mass = 0.0;

  static SpatialInertia from_body(double mass, const Eigen::Vector3d& com,
                                  const Eigen::Matrix3d& inertia_about_com) {
    SpatialInertia si;
    si.mass = mass;
    si.first_mass = mass * com;
    const Eigen::Matrix3d cx = skew(com);
    si.moment = inertia_about_com - mass * cx * cx;
    return si;
  }

  Vec6 apply(const Vec6& v) const {
    Vec6 out;
    const Eigen::Vector3d w = v.head<3>();
    const Eigen::Vector3d lin = v.tail<3>();
    out.head<3>() = moment * w + first_mass.cross(lin);
    out.tail<3>() = mass * lin - first_mass.cross(w);
    return out;
  }

  Mat6 to_matrix() const {
    Mat6 m = Mat6::Zero();
    m.topLeftCorner<3, 3>() = moment;
    m.topRightCorner<3, 3>() = skew(first_mass);
    m.bottomLeftCorner<3, 3>() = -skew(first_mass);
    m.bottomRightCorner<3, 3>() = mass * Eigen::Matrix3d::Identity();
    return m;
  }
};

}  // namespace forcekit::dynamics
