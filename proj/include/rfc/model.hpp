#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "rfc/error.hpp"
#include "rfc/rotation.hpp"

namespace rfc {

enum class GeomType { Sphere, Capsule, Box };

// Contact geometry attached to a body, one primitive per body.
struct Geometry {
  GeomType type = GeomType::Sphere;
  Vec3 offset = Vec3::Zero();        // center in body frame
  double radius = 0.0;               // sphere, capsule
  double half_length = 0.0;          // capsule, along axis
  Vec3 axis = Vec3::UnitY();         // capsule axis, body frame
  Vec3 half_extents = Vec3::Zero();  // box
};

enum class JointKind { Free, Hinge };

struct Body {
  std::string name;
  int parent = -1;                 // -1 for the root
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();     // about COM, body frame
  Vec3 attach_offset = Vec3::Zero();  // joint anchor in parent frame
  Vec3 com_offset = Vec3::Zero();     // COM in body frame
  Geometry geom;
  bool has_geom = false;

  JointKind joint = JointKind::Hinge;
  std::vector<Vec3> axes;          // hinge axes, intrinsic order, 1..3
};

// Articulated humanoid description. Immutable after load; FK, Jacobian and
// dynamics operations are pure functions of (model, state).
class HumanoidModel {
 public:
  std::string name;
  std::vector<Body> bodies;

  // Per non-root DoF, in joint order.
  VecX kp, kd, torque_limits, armature;

  std::vector<int> end_effectors;  // body indices
  std::vector<int> rfc_bodies;     // bodies eligible for explicit residuals

  std::vector<std::string> load_warnings;

  static constexpr int kRootDofs = 6;

  int body_count() const { return static_cast<int>(bodies.size()); }
  int dof_count() const { return dof_count_; }
  int joint_dof_count() const { return dof_count_ - kRootDofs; }
  int nq() const { return dof_count_ + 1; }  // quaternion root adds one slot

  // Velocity-space index of body b's first joint DoF.
  int joint_dof_start(int b) const { return joint_dof_start_[b]; }
  int joint_dof_size(int b) const {
    return static_cast<int>(bodies[b].axes.size());
  }
  // qpos index of body b's first joint angle.
  int joint_qpos_start(int b) const { return joint_dof_start_[b] + 1; }

  // All velocity DoF indices that move body b (root DoFs plus the joint
  // DoFs of every body on the path from the root to b).
  const std::vector<int>& body_dof_path(int b) const { return dof_path_[b]; }

  double total_mass() const { return total_mass_; }

  // Recomputes derived tables and checks structural invariants.
  // Throws ValidationError on a broken model.
  void finalize() {
    check_structure();
    const int nb = body_count();
    joint_dof_start_.assign(nb, -1);
    int dof = kRootDofs;
    for (int b = 1; b < nb; ++b) {
      joint_dof_start_[b] = dof;
      dof += static_cast<int>(bodies[b].axes.size());
    }
    dof_count_ = dof;

    dof_path_.assign(nb, {});
    for (int b = 0; b < nb; ++b) {
      std::vector<int> path;
      for (int a = b; a > 0; a = bodies[a].parent)
        for (int k = joint_dof_size(a) - 1; k >= 0; --k)
          path.push_back(joint_dof_start_[a] + k);
      for (int k = kRootDofs - 1; k >= 0; --k) path.push_back(k);
      std::reverse(path.begin(), path.end());
      dof_path_[b] = std::move(path);
    }

    total_mass_ = 0.0;
    for (const auto& body : bodies) total_mass_ += body.mass;

    check_parameters();
  }

 private:
  void check_structure() const {
    const int nb = body_count();
    if (nb == 0) throw ValidationError("model has no bodies");
    if (bodies[0].parent != -1 || bodies[0].joint != JointKind::Free)
      throw ValidationError("body 0 must be the free-jointed root");
    for (int b = 1; b < nb; ++b) {
      const Body& body = bodies[b];
      if (body.joint != JointKind::Hinge)
        throw ValidationError("non-root body '" + body.name +
                              "' must use a hinge joint");
      if (body.parent < 0 || body.parent >= nb || body.parent == b)
        throw ValidationError("body '" + body.name + "' has invalid parent");
      if (body.axes.empty() || body.axes.size() > 3)
        throw ValidationError("hinge joint on '" + body.name +
                              "' needs 1 to 3 axes");
      for (const Vec3& ax : body.axes)
        if (ax.norm() < 1e-12)
          throw ValidationError("zero-length hinge axis on '" + body.name +
                                "'");
    }
    // Cycle detection before relying on index ordering.
    for (int b = 1; b < nb; ++b) {
      int a = b, steps = 0;
      while (a > 0) {
        a = bodies[a].parent;
        if (++steps > nb)
          throw ValidationError("kinematic tree has a cycle through body '" +
                                bodies[b].name + "'");
      }
    }
    for (int b = 1; b < nb; ++b)
      if (bodies[b].parent >= b)
        throw ValidationError(
            "bodies must be topologically ordered (parent of '" +
            bodies[b].name + "' comes after it)");
  }

  void check_parameters() const {
    for (const auto& body : bodies) {
      if (!(body.mass > 0.0))
        throw ValidationError("body '" + body.name +
                              "' has nonpositive mass");
      for (int k = 0; k < 3; ++k)
        if (!(body.inertia(k, k) > 0.0))
          throw ValidationError("body '" + body.name +
                                "' has nonpositive inertia diagonal");
    }
    const int nj = joint_dof_count();
    auto check_len = [&](const VecX& v, const char* what) {
      if (v.size() != nj)
        throw ValidationError(std::string(what) +
                              " has wrong length for this model");
    };
    check_len(kp, "kp");
    check_len(kd, "kd");
    check_len(torque_limits, "torque_limits");
    check_len(armature, "armature");
    for (int i = 0; i < nj; ++i) {
      if (!(kp[i] > 0.0)) throw ValidationError("kp must be positive");
      if (!(kd[i] >= 0.0)) throw ValidationError("kd must be nonnegative");
      if (!(torque_limits[i] > 0.0))
        throw ValidationError("torque limits must be positive");
      if (!(armature[i] >= 0.0))
        throw ValidationError("armature must be nonnegative");
    }
  }

  int dof_count_ = kRootDofs;
  std::vector<int> joint_dof_start_;
  std::vector<std::vector<int>> dof_path_;
  double total_mass_ = 0.0;
};

// Generalized state x = (q, qdot).
//
// qpos layout: [root position (3), root quaternion (w,x,y,z), joint angles].
// qvel layout: [root linear velocity, root angular velocity, joint rates],
// with both root velocity blocks expressed in the root body frame.
struct HumanoidState {
  VecX qpos;
  VecX qvel;
  double time = 0.0;

  static HumanoidState zero(const HumanoidModel& model) {
    HumanoidState s;
    s.qpos = VecX::Zero(model.nq());
    s.qpos[3] = 1.0;  // identity quaternion
    s.qvel = VecX::Zero(model.dof_count());
    return s;
  }

  Vec3 root_pos() const { return qpos.segment<3>(0); }
  void set_root_pos(const Vec3& p) { qpos.segment<3>(0) = p; }

  Quat root_quat() const {
    return Quat(qpos[3], qpos[4], qpos[5], qpos[6]);
  }
  void set_root_quat(const Quat& q) {
    qpos[3] = q.w();
    qpos[4] = q.x();
    qpos[5] = q.y();
    qpos[6] = q.z();
  }

  Eigen::VectorBlock<const VecX> joint_angles(const HumanoidModel& m) const {
    return qpos.segment(7, m.joint_dof_count());
  }
  Eigen::VectorBlock<VecX> joint_angles(const HumanoidModel& m) {
    return qpos.segment(7, m.joint_dof_count());
  }
  Eigen::VectorBlock<const VecX> joint_rates(const HumanoidModel& m) const {
    return qvel.segment(6, m.joint_dof_count());
  }

  Vec3 root_lin_vel_local() const { return qvel.segment<3>(0); }
  Vec3 root_ang_vel_local() const { return qvel.segment<3>(3); }

  void check_dims(const HumanoidModel& m) const {
    if (qpos.size() != m.nq() || qvel.size() != m.dof_count())
      throw ContractError("state dimension does not match model");
  }
};

}  // namespace rfc
