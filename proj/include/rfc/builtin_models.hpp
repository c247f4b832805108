#pragma once

#include <string>

#include "rfc/dynamics.hpp"
#include "rfc/model.hpp"

namespace rfc {

namespace detail {

inline Mat3 box_inertia(double mass, const Vec3& half) {
  const double x = 2 * half.x(), y = 2 * half.y(), z = 2 * half.z();
  Mat3 inertia = Mat3::Zero();
  inertia(0, 0) = mass / 12.0 * (y * y + z * z);
  inertia(1, 1) = mass / 12.0 * (x * x + z * z);
  inertia(2, 2) = mass / 12.0 * (x * x + y * y);
  return inertia;
}

inline Mat3 sphere_inertia(double mass, double r) {
  return Mat3::Identity() * (0.4 * mass * r * r);
}

inline void default_joint_params(HumanoidModel& m, double kp, double limit,
                                 double armature = 0.01) {
  int nj = 0;
  for (size_t b = 1; b < m.bodies.size(); ++b)
    nj += static_cast<int>(m.bodies[b].axes.size());
  m.kp = VecX::Constant(nj, kp);
  m.kd = 0.2 * m.kp;
  m.torque_limits = VecX::Constant(nj, limit);
  m.armature = VecX::Constant(nj, armature);
}

}  // namespace detail

// Single free rigid body with a box geometry.
inline HumanoidModel make_free_box(double mass = 2.0,
                                   const Vec3& half = Vec3(0.1, 0.1, 0.1)) {
  HumanoidModel m;
  m.name = "free_box";
  Body root;
  root.name = "box";
  root.parent = -1;
  root.joint = JointKind::Free;
  root.mass = mass;
  root.inertia = detail::box_inertia(mass, half);
  root.geom.type = GeomType::Box;
  root.geom.half_extents = half;
  root.has_geom = true;
  m.bodies.push_back(root);
  detail::default_joint_params(m, 1.0, 1.0);
  m.finalize();
  m.end_effectors = {0};
  m.rfc_bodies = {0};
  return m;
}

inline HumanoidModel make_free_sphere(double mass = 2.0, double radius = 0.1) {
  HumanoidModel m;
  m.name = "free_sphere";
  Body root;
  root.name = "ball";
  root.parent = -1;
  root.joint = JointKind::Free;
  root.mass = mass;
  root.inertia = detail::sphere_inertia(mass, radius);
  root.geom.type = GeomType::Sphere;
  root.geom.radius = radius;
  root.has_geom = true;
  m.bodies.push_back(root);
  detail::default_joint_params(m, 1.0, 1.0);
  m.finalize();
  m.end_effectors = {0};
  m.rfc_bodies = {0};
  return m;
}

// Three-link chain with mixed joint types: 1-DoF, 3-DoF (intrinsic x-y-z),
// 1-DoF. Exercises multi-axis joints in FK/Jacobian/dynamics tests.
inline HumanoidModel make_chain3() {
  HumanoidModel m;
  m.name = "chain3";

  Body root;
  root.name = "base";
  root.parent = -1;
  root.joint = JointKind::Free;
  root.mass = 1.0;
  root.inertia = detail::box_inertia(1.0, Vec3(0.05, 0.05, 0.05));
  m.bodies.push_back(root);

  Body link1;
  link1.name = "link1";
  link1.parent = 0;
  link1.joint = JointKind::Hinge;
  link1.axes = {Vec3::UnitZ()};
  link1.attach_offset = Vec3(0.1, 0.0, 0.0);
  link1.com_offset = Vec3(0.15, 0.0, 0.0);
  link1.mass = 0.5;
  link1.inertia = detail::box_inertia(0.5, Vec3(0.15, 0.02, 0.02));
  m.bodies.push_back(link1);

  Body link2;
  link2.name = "link2";
  link2.parent = 1;
  link2.joint = JointKind::Hinge;
  link2.axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  link2.attach_offset = Vec3(0.3, 0.0, 0.0);
  link2.com_offset = Vec3(0.1, 0.0, 0.0);
  link2.mass = 0.4;
  link2.inertia = detail::box_inertia(0.4, Vec3(0.1, 0.02, 0.02));
  m.bodies.push_back(link2);

  Body link3;
  link3.name = "link3";
  link3.parent = 2;
  link3.joint = JointKind::Hinge;
  link3.axes = {Vec3::UnitY()};
  link3.attach_offset = Vec3(0.2, 0.0, 0.0);
  link3.com_offset = Vec3(0.08, 0.0, 0.0);
  link3.mass = 0.3;
  link3.inertia = detail::box_inertia(0.3, Vec3(0.08, 0.015, 0.015));
  m.bodies.push_back(link3);

  detail::default_joint_params(m, 100.0, 60.0);
  m.finalize();
  m.end_effectors = {3};
  m.rfc_bodies = {0};
  return m;
}

// Double pendulum hanging from a massive base. With point_mass = true the
// links carry their mass at the distal end with negligible rotary inertia,
// matching the textbook closed-form mass matrix.
inline HumanoidModel make_double_pendulum(double m1 = 1.0, double m2 = 0.8,
                                          double l1 = 0.5, double l2 = 0.4,
                                          bool point_mass = false) {
  HumanoidModel m;
  m.name = "double_pendulum";

  Body base;
  base.name = "base";
  base.parent = -1;
  base.joint = JointKind::Free;
  base.mass = 1e6;
  base.inertia = Mat3::Identity() * 1e6;
  m.bodies.push_back(base);

  const double eps = 1e-12;
  Body link1;
  link1.name = "link1";
  link1.parent = 0;
  link1.joint = JointKind::Hinge;
  link1.axes = {Vec3::UnitZ()};
  link1.attach_offset = Vec3::Zero();
  link1.com_offset = Vec3(l1, 0.0, 0.0);
  link1.mass = m1;
  link1.inertia = point_mass ? Mat3::Identity() * eps
                             : detail::box_inertia(m1, Vec3(l1 / 2, 0.02,
                                                            0.02));
  m.bodies.push_back(link1);

  Body link2;
  link2.name = "link2";
  link2.parent = 1;
  link2.joint = JointKind::Hinge;
  link2.axes = {Vec3::UnitZ()};
  link2.attach_offset = Vec3(l1, 0.0, 0.0);
  link2.com_offset = Vec3(l2, 0.0, 0.0);
  link2.mass = m2;
  link2.inertia = point_mass ? Mat3::Identity() * eps
                             : detail::box_inertia(m2, Vec3(l2 / 2, 0.02,
                                                            0.02));
  m.bodies.push_back(link2);

  detail::default_joint_params(m, 100.0, 1e9, 0.0);
  m.finalize();
  m.end_effectors = {2};
  m.rfc_bodies = {0};
  return m;
}

// Wide box base resting on the ground with one actuated arm on top. Small
// enough for fast PPO sanity runs, stable enough to stand unaided.
inline HumanoidModel make_pendulum_rig(double kp = 300.0) {
  HumanoidModel m;
  m.name = "pendulum_rig";

  Body base;
  base.name = "base";
  base.parent = -1;
  base.joint = JointKind::Free;
  base.mass = 10.0;
  const Vec3 base_half(0.25, 0.3, 0.25);
  base.inertia = detail::box_inertia(10.0, base_half);
  base.geom.type = GeomType::Box;
  base.geom.half_extents = base_half;
  base.has_geom = true;
  m.bodies.push_back(base);

  Body arm;
  arm.name = "arm";
  arm.parent = 0;
  arm.joint = JointKind::Hinge;
  arm.axes = {Vec3::UnitZ()};
  arm.attach_offset = Vec3(0.0, 0.3, 0.0);
  arm.com_offset = Vec3(0.15, 0.0, 0.0);
  arm.mass = 0.5;
  arm.inertia = detail::box_inertia(0.5, Vec3(0.15, 0.02, 0.02));
  m.bodies.push_back(arm);

  detail::default_joint_params(m, kp, 0.2 * kp);
  m.finalize();
  m.end_effectors = {1};
  m.rfc_bodies = {0};
  return m;
}

// Heavy-base single joint with configurable link inertia; used by the PD
// stability comparisons.
inline HumanoidModel make_one_joint(double link_inertia = 0.05,
                                    double kp = 1000.0) {
  HumanoidModel m;
  m.name = "one_joint";

  Body base;
  base.name = "base";
  base.parent = -1;
  base.joint = JointKind::Free;
  base.mass = 1e6;
  base.inertia = Mat3::Identity() * 1e6;
  m.bodies.push_back(base);

  Body link;
  link.name = "link";
  link.parent = 0;
  link.joint = JointKind::Hinge;
  link.axes = {Vec3::UnitZ()};
  link.com_offset = Vec3(std::sqrt(link_inertia / 1.0), 0.0, 0.0);
  link.mass = 1.0;
  link.inertia = Mat3::Identity() * 1e-6;
  m.bodies.push_back(link);

  detail::default_joint_params(m, kp, 1e9, 0.0);
  m.finalize();
  m.end_effectors = {1};
  m.rfc_bodies = {0};
  return m;
}

// Compact biped: box torso, two single-DoF hips and knees, box shins whose
// flat bottoms double as feet. 10 DoFs total.
inline HumanoidModel make_biped() {
  HumanoidModel m;
  m.name = "biped";

  Body torso;
  torso.name = "torso";
  torso.parent = -1;
  torso.joint = JointKind::Free;
  torso.mass = 3.0;
  const Vec3 torso_half(0.10, 0.15, 0.12);
  torso.inertia = detail::box_inertia(3.0, torso_half);
  torso.geom.type = GeomType::Box;
  torso.geom.half_extents = torso_half;
  torso.has_geom = true;
  m.bodies.push_back(torso);

  for (const double side : {1.0, -1.0}) {
    const std::string suffix = side > 0 ? "_l" : "_r";

    Body thigh;
    thigh.name = "thigh" + suffix;
    thigh.parent = 0;
    thigh.joint = JointKind::Hinge;
    thigh.axes = {Vec3::UnitZ()};  // pitch, x is forward
    thigh.attach_offset = Vec3(0.0, -0.15, side * 0.09);
    thigh.com_offset = Vec3(0.0, -0.12, 0.0);
    thigh.mass = 0.8;
    thigh.inertia = detail::box_inertia(0.8, Vec3(0.04, 0.12, 0.04));
    m.bodies.push_back(thigh);

    Body shin;
    shin.name = "shin" + suffix;
    shin.parent = static_cast<int>(m.bodies.size()) - 1;
    shin.joint = JointKind::Hinge;
    shin.axes = {Vec3::UnitZ()};
    shin.attach_offset = Vec3(0.0, -0.24, 0.0);
    shin.com_offset = Vec3(0.0, -0.12, 0.0);
    shin.mass = 0.6;
    const Vec3 shin_half(0.07, 0.12, 0.06);
    shin.inertia = detail::box_inertia(0.6, shin_half);
    shin.geom.type = GeomType::Box;
    shin.geom.half_extents = shin_half;
    shin.geom.offset = Vec3(0.0, -0.12, 0.0);
    shin.has_geom = true;
    m.bodies.push_back(shin);
  }

  detail::default_joint_params(m, 300.0, 60.0);
  m.finalize();
  m.end_effectors = {2, 4};  // shins
  m.rfc_bodies = {0};
  return m;
}

// Root height at which the lowest geometry point touches the ground when
// every joint angle is zero and the root is upright.
inline double rest_root_height(const HumanoidModel& model) {
  HumanoidState s = HumanoidState::zero(model);
  const KinCache kin = compute_kinematics(model, s.qpos);
  double lowest = 0.0;
  std::vector<Vec3> pts;
  for (int b = 0; b < model.body_count(); ++b) {
    if (!model.bodies[b].has_geom) continue;
    pts.clear();
    detail::collect_ground_candidates(model.bodies[b], kin.body[b], pts);
    for (const Vec3& p : pts) lowest = std::min(lowest, p.y());
  }
  return -lowest;
}

inline HumanoidModel builtin_model(const std::string& name) {
  if (name == "free_box") return make_free_box();
  if (name == "free_sphere") return make_free_sphere();
  if (name == "chain3") return make_chain3();
  if (name == "double_pendulum") return make_double_pendulum();
  if (name == "pendulum_rig") return make_pendulum_rig();
  if (name == "one_joint") return make_one_joint();
  if (name == "biped") return make_biped();
  throw ConfigError("unknown builtin model '" + name + "'");
}

}  // namespace rfc
