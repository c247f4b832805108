#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfc/kinematics.hpp"
#include "rfc/model.hpp"
#include "rfc/model_io.hpp"

namespace rfc {

// Fixed-rate reference motion: one qpos vector per frame. Velocities are
// derived by finite differences at load/creation time (no filtering).
struct MotionClip {
  std::string name;
  double fps = 30.0;
  std::uint64_t model_id = 0;  // model_hash() of the authoring model
  std::vector<VecX> frames;      // qpos
  std::vector<VecX> velocities;  // qvel, same count as frames

  int frame_count() const { return static_cast<int>(frames.size()); }
  double duration() const { return frame_count() / fps; }

  // Central differences inside, one-sided at the ends. Root angular rates
  // come from the quaternion log map in the body frame at each step.
  void compute_velocities(const HumanoidModel& model) {
    const int T = frame_count();
    const int nj = model.joint_dof_count();
    velocities.assign(T, VecX::Zero(model.dof_count()));
    if (T < 2) return;
    const double h = 1.0 / fps;

    auto one_sided = [&](int a, int b) {
      // Velocity over [a, b] expressed in the body frame of frame a's root.
      const VecX& qa = frames[a];
      const VecX& qb = frames[b];
      const Quat quat_a(qa[3], qa[4], qa[5], qa[6]);
      const Quat quat_b(qb[3], qb[4], qb[5], qb[6]);
      VecX v = VecX::Zero(model.dof_count());
      const Vec3 dp = (qb.segment<3>(0) - qa.segment<3>(0)) / h;
      v.segment<3>(0) = quat_a.conjugate() * dp;
      v.segment<3>(3) = quat_log(quat_a.conjugate() * quat_b) / h;
      v.segment(6, nj) = (qb.segment(7, nj) - qa.segment(7, nj)) / h;
      return v;
    };

    for (int t = 0; t < T; ++t) {
      if (t == 0) {
        velocities[t] = one_sided(0, 1);
      } else if (t == T - 1) {
        // Backward difference, re-expressed at frame t.
        const VecX& qa = frames[t - 1];
        const VecX& qb = frames[t];
        const Quat quat_a(qa[3], qa[4], qa[5], qa[6]);
        const Quat quat_b(qb[3], qb[4], qb[5], qb[6]);
        VecX v = VecX::Zero(model.dof_count());
        const Vec3 dp = (qb.segment<3>(0) - qa.segment<3>(0)) / h;
        v.segment<3>(0) = quat_b.conjugate() * dp;
        v.segment<3>(3) = quat_log(quat_a.conjugate() * quat_b) / h;
        v.segment(6, nj) = (qb.segment(7, nj) - qa.segment(7, nj)) / h;
        velocities[t] = v;
      } else {
        const VecX& qp = frames[t - 1];
        const VecX& qc = frames[t];
        const VecX& qn = frames[t + 1];
        const Quat quat_p(qp[3], qp[4], qp[5], qp[6]);
        const Quat quat_c(qc[3], qc[4], qc[5], qc[6]);
        const Quat quat_n(qn[3], qn[4], qn[5], qn[6]);
        VecX v = VecX::Zero(model.dof_count());
        const Vec3 dp = (qn.segment<3>(0) - qp.segment<3>(0)) / (2.0 * h);
        v.segment<3>(0) = quat_c.conjugate() * dp;
        v.segment<3>(3) = (quat_log(quat_c.conjugate() * quat_n) +
                           quat_log(quat_p.conjugate() * quat_c)) /
                          (2.0 * h);
        v.segment(6, nj) = (qn.segment(7, nj) - qp.segment(7, nj)) / (2.0 * h);
        velocities[t] = v;
      }
    }
  }

  HumanoidState state_at(const HumanoidModel& model, int t) const {
    if (t < 0 || t >= frame_count())
      throw ContractError("clip frame index out of range");
    HumanoidState s;
    s.qpos = frames[t];
    s.qvel = t < static_cast<int>(velocities.size())
                 ? velocities[t]
                 : VecX::Zero(model.dof_count());
    s.time = t / fps;
    s.check_dims(model);
    return s;
  }

  double min_root_height() const {
    double m = std::numeric_limits<double>::infinity();
    for (const VecX& f : frames) m = std::min(m, f[1]);
    return m;
  }

  void validate(const HumanoidModel& model) const {
    if (fps <= 0.0) throw ValidationError("clip frame rate must be positive");
    for (const VecX& f : frames)
      if (f.size() != model.nq())
        throw ValidationError("clip frame dimension does not match model");
  }
};

inline json save_clip_json(const MotionClip& clip) {
  json doc;
  doc["name"] = clip.name;
  doc["fps"] = clip.fps;
  std::ostringstream hash;
  hash << std::hex << clip.model_id;
  doc["model_hash"] = hash.str();
  json frames = json::array();
  for (const VecX& f : clip.frames) {
    json row = json::array();
    for (int i = 0; i < f.size(); ++i) row.push_back(f[i]);
    frames.push_back(std::move(row));
  }
  doc["frames"] = std::move(frames);
  return doc;
}

inline void save_clip(const MotionClip& clip, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write clip file '" + path + "'");
  out << save_clip_json(clip).dump() << '\n';
}

inline MotionClip load_clip_json(const json& doc, const HumanoidModel& model) {
  MotionClip clip;
  clip.name = doc.value("name", "unnamed");
  clip.fps = doc.value("fps", 30.0);
  if (doc.contains("model_hash")) {
    std::istringstream is(doc["model_hash"].get<std::string>());
    is >> std::hex >> clip.model_id;
  }
  if (!doc.contains("frames") || !doc["frames"].is_array())
    throw ParseError("clip document needs a 'frames' array");
  for (const json& row : doc["frames"]) {
    VecX f(row.size());
    for (size_t i = 0; i < row.size(); ++i) f[i] = row[i].get<double>();
    clip.frames.push_back(std::move(f));
  }
  clip.validate(model);
  clip.compute_velocities(model);
  return clip;
}

inline MotionClip load_clip(const std::string& path,
                            const HumanoidModel& model) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open clip file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("clip document: ") + e.what());
  }
  return load_clip_json(doc, model);
}

}  // namespace rfc
