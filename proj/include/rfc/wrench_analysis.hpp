#pragma once

#include <fstream>
#include <optional>
#include <vector>

#include "rfc/clip.hpp"
#include "rfc/dynamics.hpp"

namespace rfc {

struct RootWrenchFrame {
  int frame = 0;
  Vec6 eta = Vec6::Zero();  // [force; torque] on the root DoFs
  int contact_count = 0;
};

// The residual root wrench a reference motion demands: the root rows of
// inverse dynamics per frame, with accelerations from central differences
// of the clip velocities (no smoothing). A feasible, ground-supported clip
// yields near-zero values; a clip the model cannot produce does not.
// Contacts default to the penalty model evaluated on each frame's state;
// pass an explicit per-frame list (e.g. empty lists) to override.
inline std::vector<RootWrenchFrame> required_root_wrench(
    const HumanoidModel& model, const MotionClip& clip,
    const std::optional<std::vector<std::vector<ContactForce>>>&
        contacts_per_frame = std::nullopt,
    const ContactParams& contact_params = {}, double gravity = 9.81) {
  const int T = clip.frame_count();
  if (T < 3)
    throw ContractError("required_root_wrench needs at least 3 frames");
  if (contacts_per_frame && static_cast<int>(contacts_per_frame->size()) != T)
    throw ContractError("contacts_per_frame must have one entry per frame");
  const double h = 1.0 / clip.fps;

  std::vector<RootWrenchFrame> out;
  out.reserve(T);
  for (int t = 0; t < T; ++t) {
    const int prev = std::max(0, t - 1);
    const int next = std::min(T - 1, t + 1);
    const VecX qacc =
        (clip.velocities[next] - clip.velocities[prev]) / ((next - prev) * h);

    const HumanoidState state = clip.state_at(model, t);
    const std::vector<ContactForce> contacts =
        contacts_per_frame ? (*contacts_per_frame)[t]
                           : contact_forces(model, state, contact_params);
    const VecX force =
        inverse_dynamics(model, state.qpos, state.qvel, qacc, contacts,
                         gravity);
    RootWrenchFrame row;
    row.frame = t;
    row.eta = force.head<6>();
    row.contact_count = static_cast<int>(contacts.size());
    out.push_back(row);
  }
  return out;
}

inline void write_root_wrench_csv(const std::vector<RootWrenchFrame>& rows,
                                  std::ostream& os) {
  os << "frame,fx,fy,fz,tx,ty,tz,contact_count\n";
  for (const RootWrenchFrame& r : rows) {
    os << r.frame;
    for (int i = 0; i < 6; ++i) os << ',' << r.eta[i];
    os << ',' << r.contact_count << '\n';
  }
}

inline void write_root_wrench_csv(const std::vector<RootWrenchFrame>& rows,
                                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_root_wrench_csv(rows, out);
}

}  // namespace rfc
