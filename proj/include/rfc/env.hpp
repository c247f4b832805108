#pragma once

#include <memory>

#include "rfc/clip.hpp"
#include "rfc/control.hpp"
#include "rfc/features.hpp"
#include "rfc/rewards.hpp"
#include "rfc/rng.hpp"
#include "rfc/sim.hpp"

namespace rfc {

struct EnvConfig {
  ControlMode mode = ControlMode::Plain;
  bool stable_pd = true;
  bool use_phase = true;
  double force_scale = 100.0;
  double fall_margin = 0.1;  // terminate below min ref root height - margin
  int horizon = 1000;        // hard cap on episode length in policy steps
  RewardConfig reward;
  SimParams sim;
};

struct EnvStep {
  VecX features;
  double r_total = 0.0;
  double r_im = 0.0;
  double r_reg = 0.0;
  bool done = false;
  bool fell = false;
};

// Number of policy outputs past the PD-target block for a control mode.
inline int corrective_dim(ControlMode mode, const HumanoidModel& model) {
  switch (mode) {
    case ControlMode::Plain:
      return 0;
    case ControlMode::RfcExplicit:
      return 9 * static_cast<int>(model.rfc_bodies.size());
    case ControlMode::RfcImplicit:
      return 6;
  }
  return 0;
}

// Splits a flat policy action into target angles and the raw corrective
// part: explicit entries are packed [wrench(6), point(3)] per RFC body.
inline CompositeAction unpack_action(const HumanoidModel& model,
                                     ControlMode mode, const VecX& flat) {
  const int nj = model.joint_dof_count();
  if (flat.size() != nj + corrective_dim(mode, model))
    throw ContractError("action vector has wrong dimension");
  CompositeAction a;
  a.mode = mode;
  a.target = flat.head(nj);
  if (mode == ControlMode::RfcExplicit) {
    ResidualForceSet set;
    int off = nj;
    for (size_t j = 0; j < model.rfc_bodies.size(); ++j) {
      ResidualForce rf;
      rf.wrench = flat.segment<6>(off);
      rf.point = flat.segment<3>(off + 6);
      off += 9;
      set.forces.push_back(rf);
    }
    a.corrective = set;
  } else if (mode == ControlMode::RfcImplicit) {
    RootWrench w;
    w.eta = flat.segment<6>(nj);
    a.corrective = w;
  }
  return a;
}

// Environment interface rollouts are collected against. Implementations own
// their simulation state; clone() yields an independent copy per worker.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual VecX reset(Rng& rng) = 0;
  virtual EnvStep step(const VecX& flat_action, Rng& rng) = 0;
  virtual int feature_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual std::unique_ptr<RolloutEnv> clone() const = 0;
};

// Motion-imitation task: track one reference clip. Episodes start at a
// uniformly random clip frame with the state set to that frame and end at
// the reference end, at the horizon, or when the root falls 0.1 m below the
// lowest reference root height.
class ImitationEnv : public RolloutEnv {
 public:
  ImitationEnv(const HumanoidModel& model, const MotionClip& clip,
               const EnvConfig& cfg)
      : model_(&model), clip_(&clip), cfg_(cfg),
        min_ref_height_(clip.min_root_height()) {
    cfg_.reward.validate();
    if (clip.frame_count() < 2)
      throw ContractError("imitation needs a clip with >= 2 frames");
  }

  VecX reset(Rng& rng) override {
    // Random-frame initialization; every frame except the last can start an
    // episode of at least one step.
    frame_ = static_cast<int>(rng.uniform_int(clip_->frame_count() - 1));
    state_ = clip_->state_at(*model_, frame_);
    steps_ = 0;
    return features();
  }

  // Restarts from a fixed frame (tests and diagnostics).
  VecX reset_at(int frame) {
    frame_ = frame;
    state_ = clip_->state_at(*model_, frame_);
    steps_ = 0;
    return features();
  }

  EnvStep step(const VecX& flat_action, Rng&) override {
    const CompositeAction action =
        unpack_action(*model_, cfg_.mode, flat_action);
    // Imitation mode drives absolute PD targets.
    const VecX u = action.target;
    Corrective corrective = std::monostate{};
    if (cfg_.mode != ControlMode::Plain)
      corrective = scale_corrective(action, cfg_.force_scale);

    EnvStep out;
    bool diverged = false;
    ControllerConfig ctrl;
    ctrl.stable_pd = cfg_.stable_pd;
    try {
      state_ = step_with_pd(*model_, state_, u, corrective, ctrl, cfg_.sim);
    } catch (const NumericError&) {
      diverged = true;
    }
    ++frame_;
    ++steps_;

    const HumanoidState ref = clip_->state_at(*model_, frame_);
    out.r_im = diverged ? 0.0
                        : imitation_reward(*model_, state_, ref, cfg_.reward);
    out.r_reg = reg_reward(corrective, cfg_.reward);
    out.r_total = total_reward(out.r_im, out.r_reg, cfg_.reward,
                               cfg_.mode != ControlMode::Plain);

    out.fell = diverged ||
               state_.root_pos().y() < min_ref_height_ - cfg_.fall_margin;
    const bool at_end = frame_ >= clip_->frame_count() - 1;
    out.done = out.fell || at_end || steps_ >= cfg_.horizon;
    out.features = features();
    return out;
  }

  int feature_dim() const override {
    return imitation_feature_dim(*model_, cfg_.use_phase);
  }
  int action_dim() const override {
    return model_->joint_dof_count() + corrective_dim(cfg_.mode, *model_);
  }
  std::unique_ptr<RolloutEnv> clone() const override {
    return std::make_unique<ImitationEnv>(*model_, *clip_, cfg_);
  }

  const HumanoidState& state() const { return state_; }
  int frame() const { return frame_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  VecX features() const {
    const double phase =
        static_cast<double>(frame_) / clip_->frame_count();
    return imitation_features(*model_, state_, phase, cfg_.use_phase);
  }

  const HumanoidModel* model_;
  const MotionClip* clip_;
  EnvConfig cfg_;
  double min_ref_height_ = 0.0;
  HumanoidState state_;
  int frame_ = 0;
  int steps_ = 0;
};

}  // namespace rfc
