#pragma once

#include <limits>
#include <set>
#include <stdexcept>

#include "forcekit/dynamics/types.hpp"

namespace forcekit::encoding {

using dynamics::TorqueSequence;

/// Largest per-(frame, joint) Euclidean torque magnitude in the sequence.
inline double peak_torque_magnitude(const TorqueSequence& tau) {
  double peak = 0.0;
  for (const auto& frame : tau.frames)
    for (int j = 0; j < frame.rows(); ++j)
      peak = std::max(peak, frame.row(j).norm());
  return peak;
}

/// Per-sequence normalization: every entry is divided by the peak torque
/// magnitude. All-zero input passes through unchanged. Peaks within a few
/// ulps of 1 are treated as exactly 1, which makes the operation idempotent.
inline TorqueSequence normalize_sequence(const TorqueSequence& tau) {
  if (!tau.all_finite()) throw std::invalid_argument("invalid input: torque");
  const double peak = peak_torque_magnitude(tau);
  constexpr double kUnitSnap = 8.0 * std::numeric_limits<double>::epsilon();
  if (peak == 0.0 || std::abs(peak - 1.0) <= kUnitSnap) return tau;
  TorqueSequence out;
  out.frames.reserve(tau.frames.size());
  for (const auto& frame : tau.frames) out.frames.push_back(frame / peak);
  return out;
}

/// Zeroes all three components of each masked joint at every frame.
inline TorqueSequence mask_joints(const TorqueSequence& tau,
                                  const std::set<int>& masked_ids) {
  const int joints = tau.joint_count();
  for (int id : masked_ids)
    if (id < 0 || id >= joints)
      throw std::invalid_argument("unknown joint id: " + std::to_string(id));
  TorqueSequence out = tau;
  for (auto& frame : out.frames)
    for (int id : masked_ids) frame.row(id).setZero();
  return out;
}

}  // namespace forcekit::encoding
