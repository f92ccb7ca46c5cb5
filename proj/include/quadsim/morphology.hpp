#pragma once

#include <array>
#include <optional>
#include <string>

#include "quadsim/types.hpp"

namespace quadsim {

// Single-stage planetary gearbox (ring fixed, sun in, carrier out) with an
// optional chain stage (drive/driven sprockets) on the knee joint.
struct TransmissionSpec {
  int sun_teeth = 20;
  int planet_teeth = 40;
  int ring_teeth = 100;
  std::optional<int> drive_sprocket_teeth;   // knee only
  std::optional<int> driven_sprocket_teeth;  // knee only
  double efficiency = 0.90;

  bool operator==(const TransmissionSpec&) const = default;
};

struct JointLimits {
  // lower/upper per joint, indexed by JointId (abad, hip, knee), radians.
  std::array<double, kJointsPerLeg> lower = {deg2rad(-35.0), deg2rad(-60.0),
                                             deg2rad(-55.0)};
  std::array<double, kJointsPerLeg> upper = {deg2rad(35.0), deg2rad(75.0),
                                             deg2rad(165.0)};

  bool operator==(const JointLimits&) const = default;
};

// Immutable parametric robot description. Conventions: body frame x forward,
// y left, z up; q = 0 is the leg pointing straight down; ab/ad rotates about
// x, hip/knee about y, positive hip swings the foot forward, positive knee
// flexes the shank backward.
//
// hip_offsets are the hip-pitch-axis origins (torso frame) at zero ab/ad
// angle. The ab/ad roll axis runs parallel to x, abad_offset meters inboard
// of the leg plane, so the foot at q = 0 sits directly below hip_offset.
struct RobotModel {
  double total_mass = 25.0;     // kg, legs lumped in (massless-leg base model)
  double leg_mass = 1.5;        // kg each, bookkeeping only
  double actuator_mass = 0.920; // kg each
  Vec3 torso_dims = Vec3(0.60, 0.30, 0.15);  // m, (length, width, height)
  std::array<Vec3, kNumLegs> hip_offsets = {
      Vec3(0.275, 0.15, 0.0), Vec3(0.275, -0.15, 0.0), Vec3(-0.275, 0.15, 0.0),
      Vec3(-0.275, -0.15, 0.0)};
  double abad_offset = 0.07;  // m, lateral distance abad axis -> leg plane
  double thigh_length = 0.25; // m
  double shank_length = 0.25; // m
  JointLimits joint_limits;
  std::array<TransmissionSpec, kJointsPerLeg> transmissions = {
      TransmissionSpec{},
      TransmissionSpec{},
      TransmissionSpec{20, 40, 100, 11, 15, 0.90}};

  const TransmissionSpec& transmission(JointId joint) const {
    return transmissions[static_cast<int>(joint)];
  }
  const Vec3& hip_offset(LegId leg) const {
    return hip_offsets[static_cast<int>(leg)];
  }

  // Torso box inertia about the COM from total mass and torso dims.
  Mat3 base_inertia() const;

  // Throws ModelValidationError naming the offending field on violation.
  void validate() const;

  bool operator==(const RobotModel&) const = default;
};

// 1 + ring/sun, ring fixed, sun in, carrier out. Throws if the mesh
// condition ring = sun + 2*planet does not hold.
double planetary_ratio(const TransmissionSpec& spec);

// abad/hip: planetary ratio; knee: planetary ratio * driven/drive sprockets.
double joint_reduction(JointId joint, const TransmissionSpec& spec);

// All three reductions for one leg, indexed by JointId.
std::array<double, kJointsPerLeg> leg_reductions(const RobotModel& model);

// q_joint[i] = q_act[i] / reduction[i] (diagonal map).
Vec3 actuator_to_joint(const Vec3& q_act,
                       const std::array<double, kJointsPerLeg>& reductions);
Vec3 joint_to_actuator(const Vec3& q_joint,
                       const std::array<double, kJointsPerLeg>& reductions);

// Companion torque map: rotor torque that realizes a joint torque.
Vec3 torque_joint_to_actuator(
    const Vec3& tau_joint, const std::array<double, kJointsPerLeg>& reductions);

struct ClampResult {
  Vec3 q;
  std::array<bool, kJointsPerLeg> violated = {false, false, false};
};

ClampResult clamp_to_limits(const Vec3& q, const JointLimits& limits);

// JSON round trip. load_model validates; both throw ConfigError /
// ModelValidationError with the offending field named.
RobotModel load_model(const std::string& path);
void save_model(const RobotModel& model, const std::string& path);

}  // namespace quadsim
