#pragma once

#include "rfc/control.hpp"
#include "rfc/dynamics.hpp"

namespace rfc {

struct ControllerConfig {
  bool stable_pd = true;
  double force_scale = 100.0;
};

// Advances one policy step (substeps * timestep) with a PD servo running at
// the simulation rate against a held target u, and the corrective action on
// zero-order hold. With stable PD the kd term is treated implicitly in the
// velocity update ((B + h kd) solve), which keeps high gains stable at
// 450 Hz; DoFs whose torque saturates fall back to a plain clamped torque.
inline HumanoidState step_with_pd(const HumanoidModel& model,
                                  const HumanoidState& state, const VecX& u,
                                  const Corrective& corrective,
                                  const ControllerConfig& ctrl,
                                  const SimParams& sim = {}) {
  state.check_dims(model);
  const int nj = model.joint_dof_count();
  if (u.size() != nj)
    throw ContractError("step_with_pd: target dimension mismatch");
  const double h = sim.timestep;

  HumanoidState s = state;
  VecX damping(nj);
  for (int k = 0; k < sim.substeps; ++k) {
    const VecX q_nr = s.joint_angles(model);
    const VecX qd_nr = s.joint_rates(model);
    VecX tau = ctrl.stable_pd ? stable_pd_torques(model, u, q_nr, qd_nr, h)
                              : pd_torques(model, u, q_nr, qd_nr);
    const VecX* damping_ptr = nullptr;
    if (ctrl.stable_pd) {
      for (int i = 0; i < nj; ++i) {
        const bool saturated = std::abs(tau[i]) >= model.torque_limits[i];
        damping[i] = saturated ? 0.0 : model.kd[i];
      }
      damping_ptr = &damping;
    }
    const auto contacts = contact_forces(model, s, sim.contact);
    const KinCache kin = compute_kinematics(model, s.qpos);
    const VecX rhs =
        detail::assemble_rhs(model, kin, s, tau, corrective, contacts,
                             sim.gravity);
    const VecX qacc = detail::solve_accel(model, s.qpos, rhs, damping_ptr, h);
    integrate_semi_implicit(model, s, qacc, h);
    if (!s.qpos.allFinite() || !s.qvel.allFinite())
      throw NumericError("integration diverged (NaN in state)");
  }
  return s;
}

}  // namespace rfc
