#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace forcekit::dynamics {

enum class JointKind { revolute, spherical };

inline int joint_dof(JointKind kind) {
  return kind == JointKind::revolute ? 1 : 3;
}

/// One joint of an articulated tree. Joints must be stored in topological
/// order: ids are 0..J-1 and every parent id is smaller than the joint's own
/// id (the root has parent -1).
struct Joint {
  int id = 0;
  int parent = -1;
  JointKind kind = JointKind::revolute;
  Eigen::Vector3d axis{0.0, 0.0, 1.0};  // unit rotation axis, revolute only
  Eigen::Vector3d offset{0.0, 0.0, 0.0};  // joint origin in the parent frame, m
};

/// Rigid-body parameters of the link driven by a joint.
struct BodyParams {
  double mass = 1.0;                          // kg
  Eigen::Vector3d com{0.0, 0.0, 0.0};         // center of mass, local frame, m
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Identity();  // about COM, kg m^2
};

/// Articulated rigid-body tree. Each joint's local frame has its origin at
/// the joint and rotates with the link; torques are reported in this frame.
struct KinematicChain {
  std::vector<Joint> joints;
  std::vector<BodyParams> bodies;
  Eigen::Vector3d gravity{0.0, -9.81, 0.0};  // m/s^2

  int joint_count() const { return static_cast<int>(joints.size()); }

  int total_dof() const {
    int n = 0;
    for (const auto& j : joints) n += joint_dof(j.kind);
    return n;
  }

  /// First generalized-coordinate index of joint i.
  int dof_offset(int i) const {
    int off = 0;
    for (int k = 0; k < i; ++k) off += joint_dof(joints[k].kind);
    return off;
  }

  void validate() const {
    if (joints.empty()) throw std::invalid_argument("chain has no joints");
    if (bodies.size() != joints.size())
      throw std::invalid_argument("chain needs one body per joint");
    int roots = 0;
    for (int i = 0; i < joint_count(); ++i) {
      const Joint& j = joints[i];
      if (j.id != i)
        throw std::invalid_argument("joint ids must be 0..J-1 in order");
      if (j.parent == -1) {
        ++roots;
      } else if (j.parent < 0 || j.parent >= i) {
        throw std::invalid_argument(
            "joint " + std::to_string(i) + ": parent must precede the joint");
      }
      if (j.kind == JointKind::revolute &&
          std::abs(j.axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("joint " + std::to_string(i) +
                                    ": revolute axis must be a unit vector");
      if (!j.offset.allFinite())
        throw std::invalid_argument("joint offset must be finite");
    }
    if (roots != 1) throw std::invalid_argument("chain must have exactly one root");
    for (int i = 0; i < joint_count(); ++i) {
      const BodyParams& b = bodies[i];
      if (!(b.mass > 0.0))
        throw std::invalid_argument("body " + std::to_string(i) +
                                    ": mass must be positive");
      if ((b.inertia - b.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("body " + std::to_string(i) +
                                    ": inertia must be symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(b.inertia);
      if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("body " + std::to_string(i) +
                                    ": inertia must be positive definite");
    }
    if (!gravity.allFinite())
      throw std::invalid_argument("gravity must be finite");
  }
};

/// Generalized position/velocity/acceleration at one instant.
struct MotionState {
  Eigen::VectorXd q;      // rad (rotation-vector coords for spherical joints)
  Eigen::VectorXd qdot;   // rad/s
  Eigen::VectorXd qddot;  // rad/s^2
};

/// Uniformly sampled trajectory of generalized coordinates.
struct MotionSequence {
  Eigen::MatrixXd frames;  // T x n, one row per frame
  double dt = 0.0;         // s

  int frame_count() const { return static_cast<int>(frames.rows()); }
  int width() const { return static_cast<int>(frames.cols()); }
};

/// External contact acting on the chain: a caller-supplied Jacobian row
/// block (3 or 6 rows, n columns) and the matching force/wrench.
struct Contact {
  int joint_id = 0;
  Eigen::MatrixXd jacobian;  // (3|6) x n
  Eigen::VectorXd wrench;    // N or N m
};

using ContactSet = std::vector<Contact>;

/// Per-frame, per-joint 3-vector torques in N m, each row in the joint's
/// local frame. Revolute rows hold the actuated moment along the joint axis
/// with the off-axis components zero; spherical rows hold the full moment.
struct TorqueSequence {
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3>> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int joint_count() const {
    return frames.empty() ? 0 : static_cast<int>(frames.front().rows());
  }

  /// Row-major flattening of frame t to a J*3 vector (encoder input layout).
  Eigen::VectorXd flatten_frame(int t) const {
    const auto& f = frames.at(static_cast<std::size_t>(t));
    Eigen::VectorXd out(f.rows() * 3);
    for (int j = 0; j < f.rows(); ++j)
      out.segment<3>(3 * j) = f.row(j).transpose();
    return out;
  }

  bool all_finite() const {
    for (const auto& f : frames)
      if (!f.allFinite()) return false;
    return true;
  }
};

}  // namespace forcekit::dynamics
