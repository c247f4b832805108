#pragma once

#include <vector>

#include "rfc/model.hpp"

namespace rfc {

struct BodyPose {
  Vec3 pos = Vec3::Zero();   // frame origin (joint anchor) in world
  Quat quat = Quat::Identity();
  Mat3 rot = Mat3::Identity();
  Vec3 com = Vec3::Zero();   // world COM
};

// One elementary hinge DoF resolved into world coordinates.
struct DofFrame {
  Vec3 axis = Vec3::Zero();    // world axis
  Vec3 anchor = Vec3::Zero();  // world anchor point
  int body = -1;               // body the DoF belongs to
};

struct KinCache {
  std::vector<BodyPose> body;
  std::vector<DofFrame> dof;  // size dof_count, entries 0..5 unused
};

inline KinCache compute_kinematics(const HumanoidModel& model,
                                   const VecX& qpos) {
  if (qpos.size() != model.nq())
    throw ContractError("forward_kinematics: qpos dimension mismatch");
  const int nb = model.body_count();
  KinCache cache;
  cache.body.resize(nb);
  cache.dof.resize(model.dof_count());

  BodyPose& root = cache.body[0];
  root.pos = qpos.segment<3>(0);
  root.quat = Quat(qpos[3], qpos[4], qpos[5], qpos[6]).normalized();
  root.rot = root.quat.toRotationMatrix();
  root.com = root.pos + root.rot * model.bodies[0].com_offset;

  for (int b = 1; b < nb; ++b) {
    const Body& body = model.bodies[b];
    const BodyPose& parent = cache.body[body.parent];
    BodyPose& pose = cache.body[b];
    pose.pos = parent.pos + parent.rot * body.attach_offset;

    Quat q = parent.quat;
    const int dof0 = model.joint_dof_start(b);
    const int q0 = model.joint_qpos_start(b);
    for (int k = 0; k < model.joint_dof_size(b); ++k) {
      const Vec3 axis_local = body.axes[k].normalized();
      DofFrame& dof = cache.dof[dof0 + k];
      dof.axis = q * axis_local;
      dof.anchor = pose.pos;
      dof.body = b;
      q = q * axis_angle_quat(axis_local, qpos[q0 + k]);
    }
    pose.quat = q.normalized();
    pose.rot = pose.quat.toRotationMatrix();
    pose.com = pose.pos + pose.rot * body.com_offset;
  }
  return cache;
}

struct VelCache {
  std::vector<Vec3> omega;     // world angular velocity per body
  std::vector<Vec3> v_origin;  // world velocity of the frame origin
  std::vector<Vec3> v_com;     // world velocity of the COM
};

inline VelCache compute_velocities(const HumanoidModel& model,
                                   const KinCache& kin, const VecX& qvel) {
  if (qvel.size() != model.dof_count())
    throw ContractError("compute_velocities: qvel dimension mismatch");
  const int nb = model.body_count();
  VelCache vel;
  vel.omega.resize(nb);
  vel.v_origin.resize(nb);
  vel.v_com.resize(nb);

  const Mat3& root_rot = kin.body[0].rot;
  vel.v_origin[0] = root_rot * qvel.segment<3>(0);
  vel.omega[0] = root_rot * qvel.segment<3>(3);
  vel.v_com[0] =
      vel.v_origin[0] + vel.omega[0].cross(kin.body[0].com - kin.body[0].pos);

  for (int b = 1; b < nb; ++b) {
    const int parent = model.bodies[b].parent;
    const Vec3 r = kin.body[b].pos - kin.body[parent].pos;
    vel.v_origin[b] = vel.v_origin[parent] + vel.omega[parent].cross(r);
    Vec3 w = vel.omega[parent];
    const int dof0 = model.joint_dof_start(b);
    for (int k = 0; k < model.joint_dof_size(b); ++k)
      w += kin.dof[dof0 + k].axis * qvel[dof0 + k];
    vel.omega[b] = w;
    vel.v_com[b] =
        vel.v_origin[b] + w.cross(kin.body[b].com - kin.body[b].pos);
  }
  return vel;
}

struct AccCache {
  std::vector<Vec3> alpha;     // world angular acceleration per body
  std::vector<Vec3> a_origin;  // world acceleration of the frame origin
  std::vector<Vec3> a_com;
};

// Propagates accelerations for a given qacc (use zero qacc to get the
// velocity-product terms that feed the bias forces).
inline AccCache compute_accelerations(const HumanoidModel& model,
                                      const KinCache& kin,
                                      const VelCache& vel, const VecX& qvel,
                                      const VecX& qacc) {
  if (qacc.size() != model.dof_count())
    throw ContractError("compute_accelerations: qacc dimension mismatch");
  const int nb = model.body_count();
  AccCache acc;
  acc.alpha.resize(nb);
  acc.a_origin.resize(nb);
  acc.a_com.resize(nb);

  // Root: for body-frame velocity coordinates v_l, w_l the world rates are
  // a = R*dv_l + w x (R*v_l) and alpha = R*dw_l (the w x R*w_l term vanishes).
  const Mat3& root_rot = kin.body[0].rot;
  acc.alpha[0] = root_rot * qacc.segment<3>(3);
  acc.a_origin[0] =
      root_rot * qacc.segment<3>(0) + vel.omega[0].cross(vel.v_origin[0]);

  for (int b = 1; b < nb; ++b) {
    const int parent = model.bodies[b].parent;
    const Vec3 r = kin.body[b].pos - kin.body[parent].pos;
    acc.a_origin[b] = acc.a_origin[parent] + acc.alpha[parent].cross(r) +
                      vel.omega[parent].cross(vel.omega[parent].cross(r));
    Vec3 al = acc.alpha[parent];
    Vec3 w_carrier = vel.omega[parent];
    const int dof0 = model.joint_dof_start(b);
    for (int k = 0; k < model.joint_dof_size(b); ++k) {
      const Vec3& axis = kin.dof[dof0 + k].axis;
      al += axis * qacc[dof0 + k] + w_carrier.cross(axis) * qvel[dof0 + k];
      w_carrier += axis * qvel[dof0 + k];
    }
    acc.alpha[b] = al;
  }
  for (int b = 0; b < nb; ++b) {
    const Vec3 rc = kin.body[b].com - kin.body[b].pos;
    acc.a_com[b] = acc.a_origin[b] + acc.alpha[b].cross(rc) +
                   vel.omega[b].cross(vel.omega[b].cross(rc));
  }
  return acc;
}

// 6 x n Jacobian of a world point attached to `body`: world point velocity
// is rows 0..2 times qvel, world angular velocity of the body is rows 3..5
// times qvel. Columns of DoFs off the body's root path are zero.
inline MatX point_jacobian_world(const HumanoidModel& model,
                                 const KinCache& kin, int body,
                                 const Vec3& point_world) {
  if (body < 0 || body >= model.body_count())
    throw ContractError("point_jacobian: invalid body index");
  MatX jac = MatX::Zero(6, model.dof_count());
  const Mat3& root_rot = kin.body[0].rot;
  const Vec3 root_pos = kin.body[0].pos;
  for (const int i : model.body_dof_path(body)) {
    Vec3 lin, ang;
    if (i < 3) {  // root translation, body-frame coordinates
      lin = root_rot.col(i);
      ang = Vec3::Zero();
    } else if (i < 6) {  // root rotation, body-frame coordinates
      ang = root_rot.col(i - 3);
      lin = ang.cross(point_world - root_pos);
    } else {
      const DofFrame& dof = kin.dof[i];
      ang = dof.axis;
      lin = dof.axis.cross(point_world - dof.anchor);
    }
    jac.block<3, 1>(0, i) = lin;
    jac.block<3, 1>(3, i) = ang;
  }
  return jac;
}

// Convenience overload: point given in the body frame.
inline MatX point_jacobian(const HumanoidModel& model, const VecX& qpos,
                           int body, const Vec3& point_local) {
  const KinCache kin = compute_kinematics(model, qpos);
  if (body < 0 || body >= model.body_count())
    throw ContractError("point_jacobian: invalid body index");
  const Vec3 p = kin.body[body].pos + kin.body[body].rot * point_local;
  return point_jacobian_world(model, kin, body, p);
}

// World poses of all bodies for a configuration.
inline std::vector<BodyPose> forward_kinematics(const HumanoidModel& model,
                                                const VecX& qpos) {
  return compute_kinematics(model, qpos).body;
}

inline Vec3 center_of_mass(const HumanoidModel& model, const KinCache& kin) {
  Vec3 c = Vec3::Zero();
  for (int b = 0; b < model.body_count(); ++b)
    c += model.bodies[b].mass * kin.body[b].com;
  return c / model.total_mass();
}

}  // namespace rfc
