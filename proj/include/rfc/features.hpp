#pragma once

#include "rfc/model.hpp"
#include "rfc/rewards.hpp"

namespace rfc {

// Core humanoid feature block, invariant to world yaw and horizontal
// position: root height, root orientation with the heading twist removed,
// root-local velocities, joint angles and rates.
//
// dim = 11 + 2 * joint_dof_count
inline VecX state_features(const HumanoidModel& model,
                           const HumanoidState& s) {
  const int nj = model.joint_dof_count();
  VecX f(11 + 2 * nj);
  const Quat yaw = heading_quat(s.root_quat());
  Quat tilt = yaw.conjugate() * s.root_quat();
  tilt.normalize();
  if (tilt.w() < 0.0) tilt.coeffs() *= -1.0;
  f[0] = s.root_pos().y();
  f[1] = tilt.w();
  f[2] = tilt.x();
  f[3] = tilt.y();
  f[4] = tilt.z();
  f.segment<3>(5) = s.root_lin_vel_local();
  f.segment<3>(8) = s.root_ang_vel_local();
  f.segment(11, nj) = s.joint_angles(model);
  f.segment(11 + nj, nj) = s.joint_rates(model);
  return f;
}

inline int state_feature_dim(const HumanoidModel& model) {
  return 11 + 2 * model.joint_dof_count();
}

// Imitation-mode policy state: humanoid features plus the optional motion
// phase t / T.
inline VecX imitation_features(const HumanoidModel& model,
                               const HumanoidState& s, double phase,
                               bool use_phase) {
  const VecX core = state_features(model, s);
  if (!use_phase) return core;
  VecX f(core.size() + 1);
  f << core, phase;
  return f;
}

inline int imitation_feature_dim(const HumanoidModel& model, bool use_phase) {
  return state_feature_dim(model) + (use_phase ? 1 : 0);
}

// Reference block for dual-policy control: the reference root pose and
// velocities expressed relative to the simulated humanoid's heading frame,
// plus the reference joint angles and rates. Invariant under a common yaw
// rotation and horizontal translation of both states.
//
// dim = 13 + 2 * joint_dof_count
inline VecX reference_features(const HumanoidModel& model,
                               const HumanoidState& sim,
                               const HumanoidState& ref) {
  const int nj = model.joint_dof_count();
  VecX f(13 + 2 * nj);
  const Quat yaw = heading_quat(sim.root_quat());
  const Vec3 rel_pos = yaw.conjugate() * (ref.root_pos() - sim.root_pos());
  Quat rel_quat = yaw.conjugate() * ref.root_quat();
  rel_quat.normalize();
  if (rel_quat.w() < 0.0) rel_quat.coeffs() *= -1.0;
  const Mat3 rot_ref = ref.root_quat().toRotationMatrix();
  const Vec3 lin = yaw.conjugate() * (rot_ref * ref.root_lin_vel_local());
  const Vec3 ang = yaw.conjugate() * (rot_ref * ref.root_ang_vel_local());
  f[0] = rel_pos.x();
  f[1] = rel_pos.y();
  f[2] = rel_pos.z();
  f[3] = rel_quat.w();
  f[4] = rel_quat.x();
  f[5] = rel_quat.y();
  f[6] = rel_quat.z();
  f.segment<3>(7) = lin;
  f.segment<3>(10) = ang;
  f.segment(13, nj) = ref.joint_angles(model);
  f.segment(13 + nj, nj) = ref.joint_rates(model);
  return f;
}

// Dual-policy state s = (x, x_ref, z).
inline VecX dual_features(const HumanoidModel& model, const HumanoidState& sim,
                          const HumanoidState& ref, const VecX& z) {
  const VecX core = state_features(model, sim);
  const VecX ref_block = reference_features(model, sim, ref);
  VecX f(core.size() + ref_block.size() + z.size());
  f << core, ref_block, z;
  return f;
}

inline int dual_feature_dim(const HumanoidModel& model, int z_dim) {
  return state_feature_dim(model) + 13 + 2 * model.joint_dof_count() + z_dim;
}

}  // namespace rfc
