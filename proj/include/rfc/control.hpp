#pragma once

#include "rfc/dynamics.hpp"
#include "rfc/model.hpp"

namespace rfc {

enum class ControlMode { Plain, RfcExplicit, RfcImplicit };

// Raw policy output before force scaling: PD targets (absolute u in
// imitation mode, residual du in dual-policy mode) plus the corrective part
// matching the control mode.
struct CompositeAction {
  ControlMode mode = ControlMode::Plain;
  VecX target;  // u or du, one entry per non-root DoF
  Corrective corrective;  // monostate for Plain
};

// tau = kp o (u - q_nr) - kd o qdot_nr, clamped to the torque limits.
inline VecX pd_torques(const HumanoidModel& model, const VecX& u,
                       const VecX& q_nr, const VecX& qdot_nr) {
  const int nj = model.joint_dof_count();
  if (u.size() != nj || q_nr.size() != nj || qdot_nr.size() != nj)
    throw ContractError("pd_torques: dimension mismatch");
  VecX tau = model.kp.cwiseProduct(u - q_nr) - model.kd.cwiseProduct(qdot_nr);
  return tau.cwiseMax(-model.torque_limits).cwiseMin(model.torque_limits);
}

// Velocity-lookahead PD: tau = kp o (u - q_nr - h qdot_nr) - kd o qdot_nr,
// clamped. Reduces to pd_torques at h = 0. The damping half of the stable
// formulation is applied implicitly by the stepping loop (see sim.hpp).
inline VecX stable_pd_torques(const HumanoidModel& model, const VecX& u,
                              const VecX& q_nr, const VecX& qdot_nr,
                              double h) {
  const int nj = model.joint_dof_count();
  if (u.size() != nj || q_nr.size() != nj || qdot_nr.size() != nj)
    throw ContractError("stable_pd_torques: dimension mismatch");
  if (h < 0.0) throw ContractError("stable_pd_torques: h must be >= 0");
  VecX tau = model.kp.cwiseProduct(u - q_nr - h * qdot_nr) -
             model.kd.cwiseProduct(qdot_nr);
  return tau.cwiseMax(-model.torque_limits).cwiseMin(model.torque_limits);
}

// u = qhat_nr + du (additive action of dual-policy control).
inline VecX compose_target(const VecX& ref_angles, const VecX& du) {
  if (ref_angles.size() != du.size())
    throw ContractError("compose_target: dimension mismatch");
  return ref_angles + du;
}

// Force scaling applied between the policy output and the dynamics:
// residual forces/torques are multiplied by `force_scale` (100 in the
// default configuration); explicit contact points pass through unscaled.
inline Corrective scale_corrective(const CompositeAction& raw,
                                   double force_scale = 100.0) {
  switch (raw.mode) {
    case ControlMode::Plain:
      throw ContractError("scale_corrective: plain mode has no corrective");
    case ControlMode::RfcExplicit: {
      ResidualForceSet scaled = std::get<ResidualForceSet>(raw.corrective);
      for (ResidualForce& rf : scaled.forces) rf.wrench *= force_scale;
      return scaled;
    }
    case ControlMode::RfcImplicit: {
      RootWrench scaled = std::get<RootWrench>(raw.corrective);
      scaled.eta *= force_scale;
      return scaled;
    }
  }
  throw ContractError("scale_corrective: unknown mode");
}

}  // namespace rfc
