#pragma once

// Independent reference implementations used to pin down expected values.
// Everything here deliberately avoids the library's computation paths: the
// pendulum formulas are closed-form, the general-chain torque oracle goes
// through energies and numerical differentiation, and the metric oracles use
// exhaustive counting rather than sorting.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "forcekit/dynamics/rotation.hpp"
#include "forcekit/dynamics/types.hpp"
#include "forcekit/encoding/force_net.hpp"
#include "test_util.hpp"

namespace fktest {

// ---------------------------------------------------------------------------
// Closed-form planar double pendulum (angles from the downward vertical).

inline Eigen::Matrix2d double_pendulum_mass_matrix(
    const DoublePendulumParams& p, const Eigen::Vector2d& q) {
  const double c2 = std::cos(q[1]);
  Eigen::Matrix2d m;
  m(0, 0) = p.m1 * p.lc1 * p.lc1 + p.i1 +
            p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2 + 2.0 * p.l1 * p.lc2 * c2) +
            p.i2;
  m(0, 1) = p.m2 * (p.lc2 * p.lc2 + p.l1 * p.lc2 * c2) + p.i2;
  m(1, 0) = m(0, 1);
  m(1, 1) = p.m2 * p.lc2 * p.lc2 + p.i2;
  return m;
}

inline Eigen::Vector2d double_pendulum_torque(const DoublePendulumParams& p,
                                              const Eigen::Vector2d& q,
                                              const Eigen::Vector2d& qd,
                                              const Eigen::Vector2d& qdd) {
  const double s2 = std::sin(q[1]);
  const double g = p.gravity;
  Eigen::Vector2d coriolis;
  coriolis[0] = -p.m2 * p.l1 * p.lc2 * s2 * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]);
  coriolis[1] = p.m2 * p.l1 * p.lc2 * s2 * qd[0] * qd[0];
  Eigen::Vector2d grav;
  grav[0] = (p.m1 * p.lc1 + p.m2 * p.l1) * g * std::sin(q[0]) +
            p.m2 * p.lc2 * g * std::sin(q[0] + q[1]);
  grav[1] = p.m2 * p.lc2 * g * std::sin(q[0] + q[1]);
  return double_pendulum_mass_matrix(p, q) * qdd + coriolis + grav;
}

// ---------------------------------------------------------------------------
// Energy-based torque oracle for arbitrary chains. Kinematics are propagated
// with plain rotation accumulation (no spatial algebra) and the Euler-Lagrange
// terms are formed from finite differences of the kinetic/potential energies.

struct EnergyOracle {
  const forcekit::dynamics::KinematicChain& chain;

  double kinetic(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const {
    using forcekit::dynamics::JointKind;
    const int j_count = chain.joint_count();
    std::vector<Eigen::Matrix3d> rot(j_count);
    std::vector<Eigen::Vector3d> pos(j_count), omega(j_count), vel(j_count);
    double energy = 0.0;
    int off = 0;
    for (int i = 0; i < j_count; ++i) {
      const auto& joint = chain.joints[i];
      Eigen::Matrix3d joint_rot;
      Eigen::Vector3d omega_local;
      if (joint.kind == JointKind::revolute) {
        joint_rot = Eigen::AngleAxisd(q[off], joint.axis).toRotationMatrix();
        omega_local = joint.axis * qd[off];
        off += 1;
      } else {
        const Eigen::Vector3d r = q.segment<3>(off);
        joint_rot = forcekit::dynamics::exp_so3(r);
        omega_local =
            forcekit::dynamics::right_jacobian_so3(r) * qd.segment<3>(off);
        off += 3;
      }
      if (joint.parent < 0) {
        rot[i] = joint_rot;
        pos[i] = joint.offset;
        omega[i] = rot[i] * omega_local;
        vel[i].setZero();
      } else {
        const int p = joint.parent;
        rot[i] = rot[p] * joint_rot;
        pos[i] = pos[p] + rot[p] * joint.offset;
        omega[i] = omega[p] + rot[i] * omega_local;
        vel[i] = vel[p] + omega[p].cross(rot[p] * joint.offset);
      }
      const auto& body = chain.bodies[i];
      const Eigen::Vector3d com_arm = rot[i] * body.com;
      const Eigen::Vector3d v_com = vel[i] + omega[i].cross(com_arm);
      const Eigen::Matrix3d inertia_world =
          rot[i] * body.inertia * rot[i].transpose();
      energy += 0.5 * body.mass * v_com.squaredNorm() +
                0.5 * omega[i].dot(inertia_world * omega[i]);
    }
    return energy;
  }

  double potential(const Eigen::VectorXd& q) const {
    using forcekit::dynamics::JointKind;
    const int j_count = chain.joint_count();
    std::vector<Eigen::Matrix3d> rot(j_count);
    std::vector<Eigen::Vector3d> pos(j_count);
    double energy = 0.0;
    int off = 0;
    for (int i = 0; i < j_count; ++i) {
      const auto& joint = chain.joints[i];
      Eigen::Matrix3d joint_rot;
      if (joint.kind == JointKind::revolute) {
        joint_rot = Eigen::AngleAxisd(q[off], joint.axis).toRotationMatrix();
        off += 1;
      } else {
        joint_rot = forcekit::dynamics::exp_so3(q.segment<3>(off));
        off += 3;
      }
      if (joint.parent < 0) {
        rot[i] = joint_rot;
        pos[i] = joint.offset;
      } else {
        rot[i] = rot[joint.parent] * joint_rot;
        pos[i] = pos[joint.parent] + rot[joint.parent] * joint.offset;
      }
      const Eigen::Vector3d com = pos[i] + rot[i] * chain.bodies[i].com;
      energy -= chain.bodies[i].mass * chain.gravity.dot(com);
    }
    return energy;
  }

  /// tau_k = sum_j d2T/(dqdot_k dq_j) qd_j + d2T/(dqdot_k dqdot_j) qdd_j
  ///         - dT/dq_k + dV/dq_k, partials by central differences.
  Eigen::VectorXd torque(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                         const Eigen::VectorXd& qdd) const {
    const int n = static_cast<int>(q.size());
    const double h = 1e-4;
    Eigen::VectorXd tau(n);
    for (int k = 0; k < n; ++k) {
      double value = 0.0;
      for (int j = 0; j < n; ++j) {
        // d2T / dqdot_k dq_j
        Eigen::VectorXd qp = q, qm = q, vp = qd, vm = qd;
        qp[j] += h;
        qm[j] -= h;
        vp[k] += h;
        vm[k] -= h;
        const double mixed_qv =
            (kinetic(qp, vp) - kinetic(qp, vm) - kinetic(qm, vp) +
             kinetic(qm, vm)) /
            (4.0 * h * h);
        value += mixed_qv * qd[j];
        // d2T / dqdot_k dqdot_j
        Eigen::VectorXd vpp = qd, vpm = qd, vmp = qd, vmm = qd;
        vpp[k] += h;
        vpp[j] += h;
        vpm[k] += h;
        vpm[j] -= h;
        vmp[k] -= h;
        vmp[j] += h;
        vmm[k] -= h;
        vmm[j] -= h;
        const double mixed_vv =
            (kinetic(q, vpp) - kinetic(q, vpm) - kinetic(q, vmp) +
             kinetic(q, vmm)) /
            (4.0 * h * h);
        value += mixed_vv * qdd[j];
      }
      Eigen::VectorXd qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      value -= (kinetic(qp, qd) - kinetic(qm, qd)) / (2.0 * h);
      value += (potential(qp) - potential(qm)) / (2.0 * h);
      tau[k] = value;
    }
    return tau;
  }
};

// ---------------------------------------------------------------------------
// Straight-line re-implementation of the force-net forward pass: plain loops
// over std::vector, no shared linear-algebra code.

inline std::vector<double> forcenet_reference_forward(
    const forcekit::encoding::ForceNetParams& p, const std::vector<double>& in) {
  std::vector<double> x = in;
  for (int layer = 0; layer < 3; ++layer) {
    const auto& l = p.layers[layer];
    const int rows = static_cast<int>(l.weight.rows());
    const int cols = static_cast<int>(l.weight.cols());
    std::vector<double> z(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r) {
      double acc = l.bias[r];
      for (int c = 0; c < cols; ++c)
        acc += l.weight(r, c) * x[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = acc;
    }
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= rows;
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= rows;
    const double inv_std = 1.0 / std::sqrt(var + p.epsilon);
    std::vector<double> h(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      const double xhat = (z[static_cast<std::size_t>(r)] - mean) * inv_std;
      const double y = l.gain[r] * xhat + l.shift[r];
      h[static_cast<std::size_t>(r)] = 0.5 * y * std::erfc(-y / std::sqrt(2.0));
    }
    x = std::move(h);
  }
  const int out_rows = static_cast<int>(p.out_weight.rows());
  const int out_cols = static_cast<int>(p.out_weight.cols());
  std::vector<double> out(static_cast<std::size_t>(out_rows));
  for (int r = 0; r < out_rows; ++r) {
    double acc = p.out_bias[r];
    for (int c = 0; c < out_cols; ++c)
      acc += p.out_weight(r, c) * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Central-finite-difference check of the analytic force-net gradients.
// Probes a deterministic random subset of entries in every parameter tensor
// (and the input) and returns the worst relative error.

struct TensorProbe {
  double* value = nullptr;
  const double* grad = nullptr;
  std::ptrdiff_t size = 0;
};

inline double forcenet_fd_max_rel_error(forcekit::encoding::ForceNetParams params,
                                        Eigen::VectorXd input,
                                        const Eigen::VectorXd& upstream,
                                        forcekit::Rng& rng,
                                        int probes_per_tensor,
                                        double step = 1e-5) {
  namespace enc = forcekit::encoding;
  const enc::ForceNetGradients grads = enc::fn_gradient(params, input, upstream);

  std::vector<TensorProbe> tensors;
  for (int i = 0; i < 3; ++i) {
    tensors.push_back({params.layers[i].weight.data(),
                       grads.layers[i].weight.data(),
                       params.layers[i].weight.size()});
    tensors.push_back({params.layers[i].bias.data(), grads.layers[i].bias.data(),
                       params.layers[i].bias.size()});
    tensors.push_back({params.layers[i].gain.data(), grads.layers[i].gain.data(),
                       params.layers[i].gain.size()});
    tensors.push_back({params.layers[i].shift.data(),
                       grads.layers[i].shift.data(),
                       params.layers[i].shift.size()});
  }
  tensors.push_back(
      {params.out_weight.data(), grads.out_weight.data(), params.out_weight.size()});
  tensors.push_back(
      {params.out_bias.data(), grads.out_bias.data(), params.out_bias.size()});
  tensors.push_back({input.data(), grads.input.data(), input.size()});

  auto loss = [&]() {
    return upstream.dot(enc::fn_forward(params, input).values);
  };

  double worst = 0.0;
  for (const TensorProbe& t : tensors) {
    const int probes =
        std::min<std::ptrdiff_t>(t.size, probes_per_tensor) > 0
            ? static_cast<int>(std::min<std::ptrdiff_t>(t.size, probes_per_tensor))
            : 0;
    for (int k = 0; k < probes; ++k) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(
          rng.below(static_cast<std::uint64_t>(t.size)));
      const double original = t.value[idx];
      t.value[idx] = original + step;
      const double loss_plus = loss();
      t.value[idx] = original - step;
      const double loss_minus = loss();
      t.value[idx] = original;
      const double numeric = (loss_plus - loss_minus) / (2.0 * step);
      const double analytic = t.grad[idx];
      const double denom =
          std::max(std::max(std::abs(numeric), std::abs(analytic)), 1e-8);
      worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Exhaustive retrieval-metric oracles (counting, no sort).

struct RetrievalCase {
  Eigen::MatrixXd distances;  // P x G
  std::vector<int> probe_labels;
  std::vector<int> gallery_labels;
  std::vector<std::vector<bool>> masked;  // true = ignore cell
};

/// 1-based rank of gallery item g for probe p among unmasked items, ties
/// broken by gallery index.
inline int brute_rank(const RetrievalCase& rc, int p, int g) {
  int rank = 1;
  for (int other = 0; other < static_cast<int>(rc.gallery_labels.size());
       ++other) {
    if (other == g || rc.masked[p][other]) continue;
    const double d = rc.distances(p, other);
    const double dg = rc.distances(p, g);
    if (d < dg || (d == dg && other < g)) ++rank;
  }
  return rank;
}

inline double brute_rank_k(const RetrievalCase& rc, int k) {
  int valid = 0, hits = 0;
  const int probes = static_cast<int>(rc.probe_labels.size());
  const int gallery = static_cast<int>(rc.gallery_labels.size());
  for (int p = 0; p < probes; ++p) {
    bool has_positive = false;
    bool hit = false;
    for (int g = 0; g < gallery; ++g) {
      if (rc.masked[p][g] || rc.gallery_labels[g] != rc.probe_labels[p])
        continue;
      has_positive = true;
      if (brute_rank(rc, p, g) <= k) hit = true;
    }
    if (!has_positive) continue;
    ++valid;
    if (hit) ++hits;
  }
  return valid == 0 ? 0.0 : static_cast<double>(hits) / valid;
}

inline double brute_map(const RetrievalCase& rc) {
  double total = 0.0;
  int valid = 0;
  const int probes = static_cast<int>(rc.probe_labels.size());
  const int gallery = static_cast<int>(rc.gallery_labels.size());
  for (int p = 0; p < probes; ++p) {
    std::vector<int> positive_ranks;
    for (int g = 0; g < gallery; ++g) {
      if (rc.masked[p][g] || rc.gallery_labels[g] != rc.probe_labels[p])
        continue;
      positive_ranks.push_back(brute_rank(rc, p, g));
    }
    if (positive_ranks.empty()) continue;
    std::sort(positive_ranks.begin(), positive_ranks.end());
    double ap = 0.0;
    for (std::size_t i = 0; i < positive_ranks.size(); ++i)
      ap += static_cast<double>(i + 1) / positive_ranks[i];
    total += ap / static_cast<double>(positive_ranks.size());
    ++valid;
  }
  return valid == 0 ? 0.0 : total / valid;
}

inline double brute_minp(const RetrievalCase& rc) {
  double total = 0.0;
  int valid = 0;
  const int probes = static_cast<int>(rc.probe_labels.size());
  const int gallery = static_cast<int>(rc.gallery_labels.size());
  for (int p = 0; p < probes; ++p) {
    int count = 0, hardest = 0;
    for (int g = 0; g < gallery; ++g) {
      if (rc.masked[p][g] || rc.gallery_labels[g] != rc.probe_labels[p])
        continue;
      ++count;
      hardest = std::max(hardest, brute_rank(rc, p, g));
    }
    if (count == 0) continue;
    total += static_cast<double>(count) / hardest;
    ++valid;
  }
  return valid == 0 ? 0.0 : total / valid;
}

// ---------------------------------------------------------------------------
// Full-matrix LCS for ROUGE-L.

inline int lcs_full_matrix(const std::vector<std::string>& a,
                           const std::vector<std::string>& b) {
  const std::size_t rows = a.size(), cols = b.size();
  std::vector<std::vector<int>> table(rows + 1, std::vector<int>(cols + 1, 0));
  for (std::size_t i = 1; i <= rows; ++i)
    for (std::size_t j = 1; j <= cols; ++j)
      table[i][j] = a[i - 1] == b[j - 1]
                        ? table[i - 1][j - 1] + 1
                        : std::max(table[i - 1][j], table[i][j - 1]);
  return table[rows][cols];
}

// ---------------------------------------------------------------------------
// Student-t two-sided p-value by adaptive Simpson quadrature of the density.

inline double student_t_log_density(double x, double df) {
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
         0.5 * std::log(df * M_PI) -
         0.5 * (df + 1.0) * std::log1p(x * x / df);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double fa, double fm, double fb,
                               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Two-sided tail mass: 2 * P(X > |t|), integrated over u in [0,1) with the
/// substitution x = |t| + u/(1-u).
inline double student_t_two_sided_oracle(double t, double df) {
  const double at = std::abs(t);
  auto integrand = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double x = at + u / (1.0 - u);
    const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
    return std::exp(student_t_log_density(x, df)) * jac;
  };
  return 2.0 * integrate(integrand, 0.0, 1.0 - 1e-12, 1e-12);
}

}  // namespace fktest
