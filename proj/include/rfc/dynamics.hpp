#pragma once

#include <variant>
#include <vector>

#include <Eigen/Cholesky>

#include "rfc/kinematics.hpp"
#include "rfc/model.hpp"

namespace rfc {

using Vec6 = Eigen::Matrix<double, 6, 1>;

// Penalty ground model replacing a constraint-based contact solver.
// Tuned for stable explicit stepping at 450 Hz.
struct ContactParams {
  double k_c = 2.0e4;     // normal spring, N/m
  double d_c = 500.0;     // normal damping, N s/m
  double mu = 0.8;        // Coulomb friction
  double v_slip = 1e-3;   // slip-speed regularization, m/s
};

struct SimParams {
  double gravity = 9.81;
  double timestep = 1.0 / 450.0;
  int substeps = 15;  // 450 Hz sim, 30 Hz policy
  ContactParams contact;
};

// A ground reaction force h_i acting at world point v_i.
struct ContactForce {
  int body = -1;
  Vec3 point = Vec3::Zero();  // world
  Vec3 force = Vec3::Zero();  // world
};

// Explicit corrective action: per eligible body a wrench xi (force + torque,
// body frame) applied at a learned body-frame point e.
struct ResidualForce {
  Vec6 wrench = Vec6::Zero();  // [force; torque], body frame
  Vec3 point = Vec3::Zero();   // body frame
};

struct ResidualForceSet {
  std::vector<ResidualForce> forces;  // one per model.rfc_bodies entry
};

// Implicit corrective action: a single generalized wrench on the root DoFs
// ([force; torque] conjugate to the root-local velocity coordinates). The
// non-root part is intentionally absent; joint torques absorb it.
struct RootWrench {
  Vec6 eta = Vec6::Zero();
};

using Corrective = std::variant<std::monostate, ResidualForceSet, RootWrench>;

inline bool corrective_is_none(const Corrective& c) {
  return std::holds_alternative<std::monostate>(c);
}

// Accumulates the generalized force of a world wrench (force at a point plus
// a pure torque) acting on `body` into q_out, using the principle of virtual
// work: Q_i = J(:,i)^T [force; torque].
inline void add_body_wrench(const HumanoidModel& model, const KinCache& kin,
                            int body, const Vec3& force_w,
                            const Vec3& torque_w, const Vec3& point_w,
                            VecX& q_out) {
  const Mat3& root_rot = kin.body[0].rot;
  const Vec3 root_pos = kin.body[0].pos;
  for (const int i : model.body_dof_path(body)) {
    if (i < 3) {
      q_out[i] += root_rot.col(i).dot(force_w);
    } else if (i < 6) {
      const Vec3 ax = root_rot.col(i - 3);
      q_out[i] += ax.dot((point_w - root_pos).cross(force_w) + torque_w);
    } else {
      const DofFrame& dof = kin.dof[i];
      q_out[i] +=
          dof.axis.dot((point_w - dof.anchor).cross(force_w) + torque_w);
    }
  }
}

// Joint-space inertia matrix B(q), symmetric positive definite, with rotor
// armature added to the non-root diagonal.
inline MatX mass_matrix(const HumanoidModel& model, const VecX& qpos) {
  const KinCache kin = compute_kinematics(model, qpos);
  const int n = model.dof_count();
  MatX B = MatX::Zero(n, n);
  MatX jac_lin(3, n), jac_ang(3, n);
  for (int b = 0; b < model.body_count(); ++b) {
    const Body& body = model.bodies[b];
    const auto& path = model.body_dof_path(b);
    jac_lin.setZero();
    jac_ang.setZero();
    const Mat3& root_rot = kin.body[0].rot;
    const Vec3 root_pos = kin.body[0].pos;
    const Vec3 com = kin.body[b].com;
    for (const int i : path) {
      if (i < 3) {
        jac_lin.col(i) = root_rot.col(i);
      } else if (i < 6) {
        const Vec3 ax = root_rot.col(i - 3);
        jac_ang.col(i) = ax;
        jac_lin.col(i) = ax.cross(com - root_pos);
      } else {
        const DofFrame& dof = kin.dof[i];
        jac_ang.col(i) = dof.axis;
        jac_lin.col(i) = dof.axis.cross(com - dof.anchor);
      }
    }
    const Mat3 inertia_w =
        kin.body[b].rot * body.inertia * kin.body[b].rot.transpose();
    for (const int i : path)
      for (const int j : path)
        B(i, j) += body.mass * jac_lin.col(i).dot(jac_lin.col(j)) +
                   jac_ang.col(i).dot(inertia_w * jac_ang.col(j));
  }
  for (int k = 0; k < model.joint_dof_count(); ++k)
    B(6 + k, 6 + k) += model.armature[k];
  return B;
}

// Required generalized force for a motion: B qacc + C qdot + g - sum J^T h.
inline VecX inverse_dynamics(const HumanoidModel& model, const VecX& qpos,
                             const VecX& qvel, const VecX& qacc,
                             const std::vector<ContactForce>& contacts = {},
                             double gravity = 9.81) {
  const KinCache kin = compute_kinematics(model, qpos);
  const VelCache vel = compute_velocities(model, kin, qvel);
  const AccCache acc = compute_accelerations(model, kin, vel, qvel, qacc);
  const Vec3 g = gravity_vector(gravity);

  VecX q_out = VecX::Zero(model.dof_count());
  for (int b = 0; b < model.body_count(); ++b) {
    const Body& body = model.bodies[b];
    const Mat3 inertia_w =
        kin.body[b].rot * body.inertia * kin.body[b].rot.transpose();
    const Vec3 force = body.mass * (acc.a_com[b] - g);
    const Vec3 torque = inertia_w * acc.alpha[b] +
                        vel.omega[b].cross(inertia_w * vel.omega[b]);
    add_body_wrench(model, kin, b, force, torque, kin.body[b].com, q_out);
  }
  for (int k = 0; k < model.joint_dof_count(); ++k)
    q_out[6 + k] += model.armature[k] * qacc[6 + k];
  for (const ContactForce& c : contacts)
    add_body_wrench(model, kin, c.body, -c.force, Vec3::Zero(), c.point,
                    q_out);
  return q_out;
}

// Bias term c(q, qdot) = C(q, qdot) qdot + g(q).
inline VecX bias_forces(const HumanoidModel& model, const VecX& qpos,
                        const VecX& qvel, double gravity = 9.81) {
  return inverse_dynamics(model, qpos, qvel,
                          VecX::Zero(model.dof_count()), {}, gravity);
}

namespace detail {

inline void collect_ground_candidates(const Body& body, const BodyPose& pose,
                                      std::vector<Vec3>& points) {
  const Geometry& g = body.geom;
  const Vec3 center = pose.pos + pose.rot * g.offset;
  switch (g.type) {
    case GeomType::Sphere:
      points.push_back(center - g.radius * up_axis());
      break;
    case GeomType::Capsule: {
      const Vec3 axis_w = pose.rot * g.axis.normalized();
      points.push_back(center + g.half_length * axis_w -
                       g.radius * up_axis());
      points.push_back(center - g.half_length * axis_w -
                       g.radius * up_axis());
      break;
    }
    case GeomType::Box: {
      const Vec3& h = g.half_extents;
      for (const double sx : {-1.0, 1.0})
        for (const double sz : {-1.0, 1.0})
          points.push_back(center +
                           pose.rot * Vec3(sx * h.x(), -h.y(), sz * h.z()));
      break;
    }
  }
}

}  // namespace detail

// Penalty ground reactions for every geometry point below the y = 0 plane.
// Normal: k_c d + d_c d_dot, clamped nonnegative. Tangential: Coulomb
// friction with slip regularization; magnitude <= mu * normal always.
inline std::vector<ContactForce> contact_forces(
    const HumanoidModel& model, const HumanoidState& state,
    const ContactParams& params = {}) {
  state.check_dims(model);
  const KinCache kin = compute_kinematics(model, state.qpos);
  const VelCache vel = compute_velocities(model, kin, state.qvel);

  std::vector<ContactForce> out;
  std::vector<Vec3> candidates;
  for (int b = 0; b < model.body_count(); ++b) {
    if (!model.bodies[b].has_geom) continue;
    candidates.clear();
    detail::collect_ground_candidates(model.bodies[b], kin.body[b],
                                      candidates);
    for (const Vec3& p : candidates) {
      const double depth = -p.y();
      if (depth <= 0.0) continue;
      const Vec3 v_point =
          vel.v_origin[b] + vel.omega[b].cross(p - kin.body[b].pos);
      const double depth_rate = -v_point.y();
      const double normal =
          std::max(0.0, params.k_c * depth + params.d_c * depth_rate);
      if (normal == 0.0) continue;
      Vec3 v_tan = v_point;
      v_tan.y() = 0.0;
      const double slip = std::max(v_tan.norm(), params.v_slip);
      const Vec3 friction = -params.mu * normal * v_tan / slip;
      ContactForce c;
      c.body = b;
      c.point = p;
      c.force = normal * up_axis() + friction;
      out.push_back(c);
    }
  }
  return out;
}

namespace detail {

// Assembles the right-hand side of the equation of motion:
//   [0; tau] + sum_i J_v^T h_i + residual-force term - c(q, qdot).
inline VecX assemble_rhs(const HumanoidModel& model, const KinCache& kin,
                         const HumanoidState& state, const VecX& tau,
                         const Corrective& corrective,
                         const std::vector<ContactForce>& contacts,
                         double gravity) {
  const int n = model.dof_count();
  VecX rhs = -bias_forces(model, state.qpos, state.qvel, gravity);
  rhs.segment(6, model.joint_dof_count()) += tau;
  for (const ContactForce& c : contacts)
    add_body_wrench(model, kin, c.body, c.force, Vec3::Zero(), c.point, rhs);

  if (const auto* explicit_set = std::get_if<ResidualForceSet>(&corrective)) {
    if (explicit_set->forces.size() != model.rfc_bodies.size())
      throw ContractError(
          "ResidualForceSet size must match model.rfc_bodies");
    for (size_t j = 0; j < explicit_set->forces.size(); ++j) {
      const int b = model.rfc_bodies[j];
      const ResidualForce& rf = explicit_set->forces[j];
      if (!rf.wrench.allFinite() || !rf.point.allFinite())
        throw ContractError("residual force entries must be finite");
      const Mat3& rot = kin.body[b].rot;
      const Vec3 force_w = rot * rf.wrench.head<3>();
      const Vec3 torque_w = rot * rf.wrench.tail<3>();
      const Vec3 point_w = kin.body[b].pos + rot * rf.point;
      add_body_wrench(model, kin, b, force_w, torque_w, point_w, rhs);
    }
  } else if (const auto* implicit = std::get_if<RootWrench>(&corrective)) {
    if (!implicit->eta.allFinite())
      throw ContractError("root wrench must be finite");
    rhs.head<6>() += implicit->eta;
  }
  return rhs;
}

// Solves (B + h * diag(joint_damping)) qacc = rhs. The damping diagonal
// carries the implicit part of stable PD; it is null otherwise.
inline VecX solve_accel(const HumanoidModel& model, const VecX& qpos,
                        const VecX& rhs, const VecX* joint_damping,
                        double h) {
  MatX B = mass_matrix(model, qpos);
  if (joint_damping != nullptr) {
    for (int k = 0; k < model.joint_dof_count(); ++k)
      B(6 + k, 6 + k) += h * (*joint_damping)[k];
  }
  Eigen::LLT<MatX> llt(B);
  if (llt.info() != Eigen::Success)
    throw NumericError("mass matrix is not positive definite");
  return llt.solve(rhs);
}

}  // namespace detail

// Joint accelerations under non-root torques tau, an optional corrective
// action (already scaled to physical units) and the given contact set.
// With corrective = none this is the original transition dynamics.
inline VecX forward_dynamics(const HumanoidModel& model,
                             const HumanoidState& state, const VecX& tau,
                             const Corrective& corrective,
                             const std::vector<ContactForce>& contacts,
                             double gravity = 9.81) {
  state.check_dims(model);
  if (tau.size() != model.joint_dof_count())
    throw ContractError("forward_dynamics: tau must have n-6 entries");
  const KinCache kin = compute_kinematics(model, state.qpos);
  const VecX rhs = detail::assemble_rhs(model, kin, state, tau, corrective,
                                        contacts, gravity);
  return detail::solve_accel(model, state.qpos, rhs, nullptr, 0.0);
}

// One semi-implicit Euler substep: velocities first, then positions with a
// quaternion exponential for the root orientation.
inline void integrate_semi_implicit(const HumanoidModel& model,
                                    HumanoidState& state, const VecX& qacc,
                                    double h) {
  state.qvel += h * qacc;
  const Quat q_old = state.root_quat();
  const Mat3 rot_old = q_old.toRotationMatrix();
  state.set_root_pos(state.root_pos() +
                     h * (rot_old * state.root_lin_vel_local()));
  Quat q_new = q_old * quat_exp(h * state.root_ang_vel_local());
  q_new.normalize();
  state.set_root_quat(q_new);
  state.joint_angles(model) += h * state.joint_rates(model);
  state.time += h;
}

// Steps the state forward by substeps * timestep with tau and the corrective
// action held constant (zero-order hold); contacts recomputed each substep.
inline HumanoidState step(const HumanoidModel& model,
                          const HumanoidState& state, const VecX& tau,
                          const Corrective& corrective,
                          const SimParams& sim = {}) {
  HumanoidState s = state;
  for (int k = 0; k < sim.substeps; ++k) {
    const auto contacts = contact_forces(model, s, sim.contact);
    const VecX qacc =
        forward_dynamics(model, s, tau, corrective, contacts, sim.gravity);
    integrate_semi_implicit(model, s, qacc, sim.timestep);
    if (!s.qpos.allFinite() || !s.qvel.allFinite())
      throw NumericError("integration diverged (NaN in state)");
  }
  return s;
}

// Kinetic plus gravitational potential energy; used by conservation tests.
inline double total_energy(const HumanoidModel& model,
                           const HumanoidState& state, double gravity = 9.81) {
  const MatX B = mass_matrix(model, state.qpos);
  const double kinetic = 0.5 * state.qvel.dot(B * state.qvel);
  const KinCache kin = compute_kinematics(model, state.qpos);
  double potential = 0.0;
  for (int b = 0; b < model.body_count(); ++b)
    potential += model.bodies[b].mass * gravity * kin.body[b].com.y();
  return kinetic + potential;
}

inline Vec3 total_linear_momentum(const HumanoidModel& model,
                                  const HumanoidState& state) {
  const KinCache kin = compute_kinematics(model, state.qpos);
  const VelCache vel = compute_velocities(model, kin, state.qvel);
  Vec3 p = Vec3::Zero();
  for (int b = 0; b < model.body_count(); ++b)
    p += model.bodies[b].mass * vel.v_com[b];
  return p;
}

}  // namespace rfc
