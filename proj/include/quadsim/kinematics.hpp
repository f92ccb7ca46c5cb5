#pragma once

#include <optional>
#include <stdexcept>

#include "quadsim/morphology.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

// all positions are expressed in the torso frame: x forward, y left, z up.
// q = (abad, hip, knee); q = 0 is the leg hanging straight down, positive hip
// swings the foot forward, positive knee folds the shank backward.

enum class KneeBranch { FlexedBack, FlexedForward };

struct UnreachableTargetError : std::domain_error {
  using std::domain_error::domain_error;
};

struct LegState {
  LegId leg_id = LegId::FL;
  Vec3 q = Vec3::Zero();
  Vec3 qdot = Vec3::Zero();
};

// origin of the abad rotation axis (inboard of the hip pitch axis)
Vec3 abad_axis_origin(const RobotModel& model, LegId leg);

Vec3 forward_kinematics(const RobotModel& model, LegId leg, const Vec3& q);

Mat3 jacobian(const RobotModel& model, LegId leg, const Vec3& q);

Vec3 foot_velocity(const RobotModel& model, LegId leg, const Vec3& q,
                   const Vec3& qdot);

// throws UnreachableTargetError when p lies outside the leg workspace.
//
// Returns the solution with the foot below the ab/ad axis (planar height
// <= 0), the posture a walking robot uses. A foot target always has a second
// above-axis preimage on the same knee branch — occasionally also inside the
// joint limits at extreme folds — which is never returned; FK restricted to
// below-axis in-limit postures is injective per branch, so IK inverts FK
// exactly on that domain.
Vec3 inverse_kinematics(const RobotModel& model, LegId leg, const Vec3& p,
                        KneeBranch branch = KneeBranch::FlexedBack);

std::optional<Vec3> try_inverse_kinematics(
    const RobotModel& model, LegId leg, const Vec3& p,
    KneeBranch branch = KneeBranch::FlexedBack);

}  // namespace quadsim
