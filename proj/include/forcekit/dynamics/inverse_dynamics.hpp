#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

#include "forcekit/dynamics/rotation.hpp"
#include "forcekit/dynamics/spatial.hpp"
#include "forcekit/dynamics/types.hpp"

namespace forcekit::dynamics {

/// Second-order finite differences of a coordinate trajectory. Interior
/// frames use central stencils, the two boundary frames use one-sided
/// stencils, so both derivatives are exact on quadratics.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> finite_difference_derivatives(
    const MotionSequence& seq) {
  const int t_count = seq.frame_count();
  if (t_count < 3) throw std::invalid_argument("sequence too short");
  if (!(seq.dt > 0.0)) throw std::invalid_argument("invalid input");
  if (!seq.frames.allFinite()) throw std::invalid_argument("invalid input");

  const double dt = seq.dt;
  const Eigen::MatrixXd& q = seq.frames;
  Eigen::MatrixXd qdot(t_count, seq.width());
  Eigen::MatrixXd qddot(t_count, seq.width());

  // Stencils are written as combinations of frame differences so that a
  // constant trajectory yields exact zeros.
  for (int t = 1; t + 1 < t_count; ++t) {
    qdot.row(t) = (q.row(t + 1) - q.row(t - 1)) / (2.0 * dt);
    qddot.row(t) =
        ((q.row(t + 1) - q.row(t)) - (q.row(t) - q.row(t - 1))) / (dt * dt);
  }
  const int last = t_count - 1;
  qdot.row(0) =
      (4.0 * (q.row(1) - q.row(0)) - (q.row(2) - q.row(0))) / (2.0 * dt);
  qdot.row(last) = (4.0 * (q.row(last) - q.row(last - 1)) -
                    (q.row(last) - q.row(last - 2))) /
                   (2.0 * dt);
  if (t_count >= 4) {
    qddot.row(0) = (2.0 * (q.row(0) - q.row(1)) - 3.0 * (q.row(1) - q.row(2)) +
                    (q.row(2) - q.row(3))) /
                   (dt * dt);
    qddot.row(last) = (2.0 * (q.row(last) - q.row(last - 1)) -
                       3.0 * (q.row(last - 1) - q.row(last - 2)) +
                       (q.row(last - 2) - q.row(last - 3))) /
                      (dt * dt);
  } else {
    // T == 3: the single interior stencil is the best available estimate.
    qddot.row(0) = qddot.row(1);
    qddot.row(last) = qddot.row(1);
  }
  return {qdot, qddot};
}

namespace detail {

struct JointFrame {
  SpatialTransform to_child;                       // parent -> child coordinates
  Eigen::Matrix<double, 6, Eigen::Dynamic> motion_subspace;  // S
  Vec6 velocity_bias = Vec6::Zero();               // Sdot * qdot
};

inline JointFrame joint_frame(const Joint& joint, const Eigen::VectorXd& q,
                              const Eigen::VectorXd* qdot, int dof_offset) {
  JointFrame jf;
  jf.to_child.translation = joint.offset;
  if (joint.kind == JointKind::revolute) {
    const double angle = q[dof_offset];
    jf.to_child.rotation =
        rotation_about_axis(joint.axis, angle).transpose();
    jf.motion_subspace.resize(6, 1);
    jf.motion_subspace.setZero();
    jf.motion_subspace.col(0).head<3>() = joint.axis;
  } else {
    const Eigen::Vector3d r = q.segment<3>(dof_offset);
    jf.to_child.rotation = exp_so3(r).transpose();
    jf.motion_subspace.resize(6, 3);
    jf.motion_subspace.setZero();
    jf.motion_subspace.topLeftCorner<3, 3>() = right_jacobian_so3(r);
    if (qdot != nullptr) {
      const Eigen::Vector3d rdot = qdot->segment<3>(dof_offset);
      jf.velocity_bias.head<3>() = right_jacobian_dot_so3(r, rdot) * rdot;
    }
  }
  return jf;
}

inline void check_state_width(const KinematicChain& chain,
                              const Eigen::VectorXd& v, const char* name) {
  if (v.size() != chain.total_dof())
    throw std::invalid_argument(std::string("dimension mismatch: ") + name);
  if (!v.allFinite())
    throw std::invalid_argument(std::string("invalid input: ") + name);
}

/// Recursive Newton-Euler sweep. Returns the generalized torque vector and
/// the transmitted moment at each joint in its local frame.
inline std::pair<Eigen::VectorXd, Eigen::Matrix<double, Eigen::Dynamic, 3>>
rnea(const KinematicChain& chain, const Eigen::VectorXd& q,
     const Eigen::VectorXd& qdot, const Eigen::VectorXd& qddot,
     const Eigen::Vector3d& gravity) {
  const int j_count = chain.joint_count();
  const int n = chain.total_dof();

  std::vector<JointFrame> frames(j_count);
  std::vector<Vec6> vel(j_count), acc(j_count), force(j_count);

  Vec6 base_acc = Vec6::Zero();
  base_acc.tail<3>() = -gravity;  // accelerating-base equivalent of gravity

  int off = 0;
  for (int i = 0; i < j_count; ++i) {
    const Joint& joint = chain.joints[i];
    const int dof = joint_dof(joint.kind);
    frames[i] = joint_frame(joint, q, &qdot, off);
    const auto& jf = frames[i];

    const Vec6 joint_vel = jf.motion_subspace * qdot.segment(off, dof);
    if (joint.parent < 0) {
      vel[i] = joint_vel;
      acc[i] = jf.to_child.apply_motion(base_acc);
    } else {
      vel[i] = jf.to_child.apply_motion(vel[joint.parent]) + joint_vel;
      acc[i] = jf.to_child.apply_motion(acc[joint.parent]);
    }
    acc[i] += jf.motion_subspace * qddot.segment(off, dof) + jf.velocity_bias +
              cross_motion(vel[i], joint_vel);

    const SpatialInertia inertia = SpatialInertia::from_body(
        chain.bodies[i].mass, chain.bodies[i].com, chain.bodies[i].inertia);
    force[i] = inertia.apply(acc[i]) + cross_force(vel[i], inertia.apply(vel[i]));
    off += dof;
  }

  Eigen::VectorXd tau(n);
  Eigen::Matrix<double, Eigen::Dynamic, 3> moments(j_count, 3);
  for (int i = j_count - 1; i >= 0; --i) {
    const Joint& joint = chain.joints[i];
    const int dof = joint_dof(joint.kind);
    off -= dof;
    tau.segment(off, dof) = frames[i].motion_subspace.transpose() * force[i];
    if (joint.kind == JointKind::revolute) {
      moments.row(i) = (tau[off] * joint.axis).transpose();
    } else {
      moments.row(i) = force[i].head<3>().transpose();
    }
    if (joint.parent >= 0)
      force[joint.parent] += frames[i].to_child.transpose_apply_force(force[i]);
  }
  return {tau, moments};
}

}  // namespace detail

/// Generalized mass matrix M(q) via the composite-rigid-body algorithm.
/// Symmetric by construction and positive definite for valid chains.
inline Eigen::MatrixXd mass_matrix(const KinematicChain& chain,
                                   const Eigen::VectorXd& q) {
  detail::check_state_width(chain, q, "q");
  const int j_count = chain.joint_count();
  const int n = chain.total_dof();

  std::vector<detail::JointFrame> frames(j_count);
  std::vector<Mat6> composite(j_count);
  for (int i = 0; i < j_count; ++i) {
    frames[i] = detail::joint_frame(chain.joints[i], q, nullptr,
                                    chain.dof_offset(i));
    composite[i] = SpatialInertia::from_body(chain.bodies[i].mass,
                                             chain.bodies[i].com,
                                             chain.bodies[i].inertia)
                       .to_matrix();
  }
  for (int i = j_count - 1; i >= 0; --i) {
    const int p = chain.joints[i].parent;
    if (p >= 0) {
      const Mat6 x = frames[i].to_child.motion_matrix();
      composite[p] += x.transpose() * composite[i] * x;
    }
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < j_count; ++i) {
    const int dof_i = joint_dof(chain.joints[i].kind);
    const int off_i = chain.dof_offset(i);
    Eigen::Matrix<double, 6, Eigen::Dynamic> f =
        composite[i] * frames[i].motion_subspace;
    Eigen::MatrixXd diag_block = frames[i].motion_subspace.transpose() * f;
    for (int r = 0; r < dof_i; ++r)  // mirror the upper triangle exactly
      for (int c = r + 1; c < dof_i; ++c) diag_block(c, r) = diag_block(r, c);
    m.block(off_i, off_i, dof_i, dof_i) = diag_block;
    int j = i;
    while (chain.joints[j].parent >= 0) {
      f = frames[j].to_child.motion_matrix().transpose() * f;
      j = chain.joints[j].parent;
      const int dof_j = joint_dof(chain.joints[j].kind);
      const int off_j = chain.dof_offset(j);
      const Eigen::MatrixXd block =
          f.transpose() * frames[j].motion_subspace;  // dof_i x dof_j
      m.block(off_i, off_j, dof_i, dof_j) = block;
      m.block(off_j, off_i, dof_j, dof_i) = block.transpose();
    }
  }
  return m;
}

/// Coriolis/centrifugal vector C(q, qdot) and gravity vector g(q).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> bias_forces(
    const KinematicChain& chain, const Eigen::VectorXd& q,
    const Eigen::VectorXd& qdot) {
  detail::check_state_width(chain, q, "q");
  detail::check_state_width(chain, qdot, "qdot");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(chain.total_dof());
  Eigen::VectorXd coriolis =
      detail::rnea(chain, q, qdot, zero, Eigen::Vector3d::Zero()).first;
  Eigen::VectorXd gravity = detail::rnea(chain, q, zero, zero, chain.gravity).first;
  return {coriolis, gravity};
}

struct JointTorques {
  Eigen::VectorXd generalized;                       // length n
  Eigen::Matrix<double, Eigen::Dynamic, 3> per_joint;  // J x 3, local frames
};

/// Inverse dynamics tau = M(q) qddot + C(q, qdot) + g(q) - Jc^T lambda,
/// evaluated by one recursive Newton-Euler traversal of the tree.
inline JointTorques inverse_dynamics(const KinematicChain& chain,
                                     const MotionState& state,
                                     const ContactSet& contacts = {}) {
  detail::check_state_width(chain, state.q, "q");
  detail::check_state_width(chain, state.qdot, "qdot");
  detail::check_state_width(chain, state.qddot, "qddot");
  const int n = chain.total_dof();

  auto [tau, moments] =
      detail::rnea(chain, state.q, state.qdot, state.qddot, chain.gravity);

  if (!contacts.empty()) {
    Eigen::VectorXd contact_term = Eigen::VectorXd::Zero(n);
    for (const Contact& c : contacts) {
      if (c.jacobian.cols() != n)
        throw std::invalid_argument("dimension mismatch: contact jacobian");
      if (c.wrench.size() != c.jacobian.rows())
        throw std::invalid_argument("dimension mismatch: contact wrench");
      if (!c.jacobian.allFinite() || !c.wrench.allFinite())
        throw std::invalid_argument("invalid input: contact");
      contact_term += c.jacobian.transpose() * c.wrench;
    }
    tau -= contact_term;
    // The per-joint layout reports actuation torques for the same tau.
    int off = 0;
    for (int i = 0; i < chain.joint_count(); ++i) {
      const Joint& joint = chain.joints[i];
      if (joint.kind == JointKind::revolute) {
        moments.row(i) = (tau[off] * joint.axis).transpose();
        off += 1;
      } else {
        const Eigen::Matrix3d jr =
            right_jacobian_so3(state.q.segment<3>(off));
        moments.row(i) =
            (jr.transpose().inverse() * tau.segment<3>(off)).transpose();
        off += 3;
      }
    }
  }
  return {tau, moments};
}

/// Per-frame inverse dynamics of a motion sequence: derivatives by finite
/// differences, then one RNEA evaluation per frame.
inline TorqueSequence torques_from_sequence(
    const KinematicChain& chain, const MotionSequence& seq,
    const std::vector<ContactSet>& contacts_per_frame = {}) {
  if (seq.width() != chain.total_dof())
    throw std::invalid_argument("dimension mismatch: sequence width");
  if (!contacts_per_frame.empty() &&
      static_cast<int>(contacts_per_frame.size()) != seq.frame_count())
    throw std::invalid_argument("dimension mismatch: contacts per frame");

  const auto [qdot, qddot] = finite_difference_derivatives(seq);
  TorqueSequence out;
  out.frames.reserve(static_cast<std::size_t>(seq.frame_count()));
  for (int t = 0; t < seq.frame_count(); ++t) {
    MotionState state{seq.frames.row(t).transpose(), qdot.row(t).transpose(),
                      qddot.row(t).transpose()};
    const ContactSet& contacts = contacts_per_frame.empty()
                                     ? ContactSet{}
                                     : contacts_per_frame[static_cast<std::size_t>(t)];
    out.frames.push_back(inverse_dynamics(chain, state, contacts).per_joint);
  }
  return out;
}

}  // namespace forcekit::dynamics
