#pragma once

#include <cmath>

#include "rfc/dynamics.hpp"
#include "rfc/kinematics.hpp"
#include "rfc/model.hpp"

namespace rfc {

enum class RewardKind { World, Local };

// All constants default to the published values; the two weight groups must
// each sum to one so that perfect tracking scores exactly 1.
struct RewardConfig {
  // World-coordinate reward: pose, velocity, end-effector, center of mass.
  double w_pose = 0.3, w_vel = 0.1, w_ee = 0.5, w_com = 0.1;
  double a_pose = 2.0, a_vel = 0.005, a_ee = 5.0, a_com = 100.0;
  // Local-coordinate reward: pose, end-effector, root pose, root velocity.
  double lw_pose = 0.5, lw_ee = 0.3, lw_root_pose = 0.1, lw_root_vel = 0.1;
  double la_pose = 2.0, la_ee = 20.0, la_root_pose = 300.0,
         la_root_vel = 0.1;
  // Residual-force regularizer.
  double w_reg = 0.1;
  double k_f = 1.0, k_cp = 4.0, k_r = 1.0;
  RewardKind kind = RewardKind::World;

  void validate() const {
    if (std::abs(w_pose + w_vel + w_ee + w_com - 1.0) > 1e-12)
      throw ValidationError("world reward weights must sum to 1");
    if (std::abs(lw_pose + lw_ee + lw_root_pose + lw_root_vel - 1.0) > 1e-12)
      throw ValidationError("local reward weights must sum to 1");
    for (const double a : {a_pose, a_vel, a_ee, a_com, la_pose, la_ee,
                           la_root_pose, la_root_vel})
      if (!(a > 0.0)) throw ValidationError("reward scales must be positive");
  }
};

// Local orientation of a non-root joint as a quaternion composed from its
// intrinsic hinge rotations.
inline Quat joint_quat(const HumanoidModel& model, const VecX& qpos,
                       int body) {
  Quat q = Quat::Identity();
  const int q0 = model.joint_qpos_start(body);
  for (int k = 0; k < model.joint_dof_size(body); ++k)
    q = q * axis_angle_quat(model.bodies[body].axes[k], qpos[q0 + k]);
  return q;
}

struct WorldReward {
  double total = 0.0;
  double pose = 0.0, vel = 0.0, ee = 0.0, com = 0.0;
};

struct LocalReward {
  double total = 0.0;
  double pose = 0.0, ee = 0.0, root_pose = 0.0, root_vel = 0.0;
};

namespace detail {

inline double pose_error_sq(const HumanoidModel& model, const VecX& q_sim,
                            const VecX& q_ref) {
  double err = 0.0;
  for (int b = 1; b < model.body_count(); ++b) {
    const double d = quat_diff_angle(joint_quat(model, q_sim, b),
                                     joint_quat(model, q_ref, b));
    err += d * d;
  }
  return err;
}

}  // namespace detail

// DeepMimic-style reward on world-frame quantities.
inline WorldReward world_reward(const HumanoidModel& model,
                                const HumanoidState& sim,
                                const HumanoidState& ref,
                                const RewardConfig& cfg = {}) {
  sim.check_dims(model);
  ref.check_dims(model);
  const KinCache kin_sim = compute_kinematics(model, sim.qpos);
  const KinCache kin_ref = compute_kinematics(model, ref.qpos);

  const double pose_err = detail::pose_error_sq(model, sim.qpos, ref.qpos);
  const double vel_err = (sim.qvel - ref.qvel).squaredNorm();
  double ee_err = 0.0;
  for (const int e : model.end_effectors)
    ee_err += (kin_sim.body[e].pos - kin_ref.body[e].pos).squaredNorm();
  const double com_err =
      (center_of_mass(model, kin_sim) - center_of_mass(model, kin_ref))
          .squaredNorm();

  WorldReward r;
  r.pose = std::exp(-cfg.a_pose * pose_err);
  r.vel = std::exp(-cfg.a_vel * vel_err);
  r.ee = std::exp(-cfg.a_ee * ee_err);
  r.com = std::exp(-cfg.a_com * com_err);
  r.total = cfg.w_pose * r.pose + cfg.w_vel * r.vel + cfg.w_ee * r.ee +
            cfg.w_com * r.com;
  return r;
}

namespace detail {

struct HeadingFrame {
  Quat yaw;       // heading twist of the root about world up
  Vec3 origin;    // root position with height zeroed
};

inline HeadingFrame heading_frame(const HumanoidState& s) {
  HeadingFrame f;
  f.yaw = heading_quat(s.root_quat());
  f.origin = Vec3(s.root_pos().x(), 0.0, s.root_pos().z());
  return f;
}

inline Vec3 to_heading_point(const HeadingFrame& f, const Vec3& p) {
  return f.yaw.conjugate() * (p - f.origin);
}

inline Vec3 to_heading_vector(const HeadingFrame& f, const Vec3& v) {
  return f.yaw.conjugate() * v;
}

}  // namespace detail

// EgoPose-style reward in the heading-local frame (root yaw and horizontal
// position removed); robust to global drift over long clips.
inline LocalReward local_reward(const HumanoidModel& model,
                                const HumanoidState& sim,
                                const HumanoidState& ref,
                                const RewardConfig& cfg = {}) {
  sim.check_dims(model);
  ref.check_dims(model);
  const KinCache kin_sim = compute_kinematics(model, sim.qpos);
  const KinCache kin_ref = compute_kinematics(model, ref.qpos);
  const detail::HeadingFrame hf_sim = detail::heading_frame(sim);
  const detail::HeadingFrame hf_ref = detail::heading_frame(ref);

  const double pose_err = detail::pose_error_sq(model, sim.qpos, ref.qpos);

  double ee_err = 0.0;
  for (const int e : model.end_effectors) {
    const Vec3 g_sim = detail::to_heading_point(hf_sim, kin_sim.body[e].pos);
    const Vec3 g_ref = detail::to_heading_point(hf_ref, kin_ref.body[e].pos);
    ee_err += (g_sim - g_ref).squaredNorm();
  }

  const double dy = sim.root_pos().y() - ref.root_pos().y();
  const Quat o_sim = hf_sim.yaw.conjugate() * sim.root_quat();
  const Quat o_ref = hf_ref.yaw.conjugate() * ref.root_quat();
  const double o_err = quat_diff_angle(o_sim.normalized(),
                                       o_ref.normalized());
  const double root_pose_err = dy * dy + o_err * o_err;

  const Mat3 rot_sim = sim.root_quat().toRotationMatrix();
  const Mat3 rot_ref = ref.root_quat().toRotationMatrix();
  const Vec3 l_sim = detail::to_heading_vector(
      hf_sim, rot_sim * sim.root_lin_vel_local());
  const Vec3 l_ref = detail::to_heading_vector(
      hf_ref, rot_ref * ref.root_lin_vel_local());
  const Vec3 w_sim = detail::to_heading_vector(
      hf_sim, rot_sim * sim.root_ang_vel_local());
  const Vec3 w_ref = detail::to_heading_vector(
      hf_ref, rot_ref * ref.root_ang_vel_local());
  const double lin_err = (l_sim - l_ref).squaredNorm();
  const double ang_err = (w_sim - w_ref).squaredNorm();

  LocalReward r;
  r.pose = std::exp(-cfg.la_pose * pose_err);
  r.ee = std::exp(-cfg.la_ee * ee_err);
  r.root_pose = std::exp(-cfg.la_root_pose * root_pose_err);
  r.root_vel = std::exp(-lin_err - cfg.la_root_vel * ang_err);
  r.total = cfg.lw_pose * r.pose + cfg.lw_ee * r.ee +
            cfg.lw_root_pose * r.root_pose + cfg.lw_root_vel * r.root_vel;
  return r;
}

// Regularizing reward on the (already scaled) corrective action. Zero
// corrective action scores exactly 1.
inline double reg_reward(const Corrective& corrective,
                         const RewardConfig& cfg = {}) {
  if (const auto* ex = std::get_if<ResidualForceSet>(&corrective)) {
    double s = 0.0;
    for (const ResidualForce& rf : ex->forces)
      s += cfg.k_f * rf.wrench.squaredNorm() +
           cfg.k_cp * rf.point.squaredNorm();
    return std::exp(-s);
  }
  if (const auto* im = std::get_if<RootWrench>(&corrective))
    return std::exp(-cfg.k_r * im->eta.squaredNorm());
  return 1.0;
}

// r = r_im + w_reg * r_reg in the RFC modes; plain control has no
// regularizer term.
inline double total_reward(double r_im, double r_reg, const RewardConfig& cfg,
                           bool rfc_active) {
  return rfc_active ? r_im + cfg.w_reg * r_reg : r_im;
}

inline double imitation_reward(const HumanoidModel& model,
                               const HumanoidState& sim,
                               const HumanoidState& ref,
                               const RewardConfig& cfg = {}) {
  return cfg.kind == RewardKind::World
             ? world_reward(model, sim, ref, cfg).total
             : local_reward(model, sim, ref, cfg).total;
}

}  // namespace rfc
