#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>

#include "quadsim/actuator.hpp"
#include "quadsim/kinematics.hpp"
#include "quadsim/morphology.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

enum class TerrainKind { Flat, Incline };

struct Terrain {
  TerrainKind kind = TerrainKind::Flat;
  double slope_angle = 0.0;  // rad, tilt about world y; +x runs uphill
  double friction_coefficient = 0.6;  // placeholder, not a measured value
  double contact_stiffness = 30000.0;   // N/m, placeholder
  double contact_damping = 1000.0;      // N s/m, placeholder
  double tangential_damping = 2000.0;   // N s/m, viscous friction model

  void validate() const;
  GroundPlane plane() const;
};

struct GroundSample {
  double height = 0.0;
  Vec3 normal = Vec3::UnitZ();
};

GroundSample ground_height_and_normal(double x, double y,
                                      const Terrain& terrain);

// ground reaction on the foot; zero when not penetrating
Vec3 contact_force(const Vec3& foot_pos, const Vec3& foot_vel,
                   const Terrain& terrain);

struct SimState {
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();
  Vec3 base_linear_velocity = Vec3::Zero();   // world
  Vec3 base_angular_velocity = Vec3::Zero();  // world
  // angular momentum is the integrated quantity; angular velocity is derived
  // from it each step so torque-free motion conserves momentum exactly
  Vec3 base_angular_momentum = Vec3::Zero();     // world
  Vec3 base_linear_acceleration = Vec3::Zero();  // world, from last step
  std::array<LegState, kNumLegs> joints;
  std::array<ActuatorState, kNumJoints> actuators;
  double time = 0.0;
  std::array<bool, kNumLegs> in_contact = {false, false, false, false};
};

inline int joint_index(LegId leg, JointId joint) {
  return static_cast<int>(leg) * kJointsPerLeg + static_cast<int>(joint);
}

struct SimParams {
  double dt = 1e-3;                      // s, must be in (0, 2 ms]
  double joint_viscous_friction = 0.02;  // Nm s/rad
  bool enforce_joint_limits = true;
  bool parallel_legs = false;  // OpenMP over legs; bit-identical to serial
  MotorParams motor;
  ThermalParams thermal = thermal_params_with_sink();

  void validate() const;
};

class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(const std::string& what, std::string snapshot)
      : std::runtime_error(what), snapshot_(std::move(snapshot)) {}
  const std::string& snapshot() const { return snapshot_; }

 private:
  std::string snapshot_;
};

// one 1 kHz physics step: contact forces from ground-truth penetration, base
// twist then pose (semi-implicit Euler), reflected-inertia joint dynamics
// with the contact damping handled implicitly, actuator electrical/thermal
// update, hard-stop joint limits. commands are joint-side torques.
SimState step(const SimState& state,
              const std::array<double, kNumJoints>& joint_torque_cmds,
              const Terrain& terrain, const RobotModel& model,
              const SimParams& params);

// body-frame kinematics helpers used by sim and controller
Vec3 foot_position_world(const SimState& state, const RobotModel& model,
                         LegId leg);
Vec3 foot_velocity_world(const SimState& state, const RobotModel& model,
                         LegId leg);

// keeps angular velocity and the integrated angular momentum consistent
void set_base_angular_velocity(SimState& state, const RobotModel& model,
                               const Vec3& omega_world);

struct ImuReading {
  Quat orientation = Quat::Identity();
  Vec3 angular_velocity = Vec3::Zero();  // body frame
  Vec3 specific_force = Vec3::Zero();    // body frame, accel minus gravity
};

struct ImuNoise {
  bool enabled = false;
  double gyro_stddev = 0.0;   // rad/s
  double accel_stddev = 0.0;  // m/s^2
};

class Imu {
 public:
  Imu() = default;
  Imu(const ImuNoise& noise, uint64_t seed) : noise_(noise), rng_(seed) {}
  ImuReading read(const SimState& state);

 private:
  ImuNoise noise_;
  std::mt19937_64 rng_{0};
};

// noiseless readout
ImuReading imu_readout(const SimState& state);

// standing pose on the terrain: base aligned with the slope at stance_height
// above the plane, feet under the hips with the static spring compression
// preset so the start is near equilibrium
SimState initial_standing_state(const RobotModel& model, const Terrain& terrain,
                                double stance_height,
                                const SimParams& params);

// CSV state trace: time, base pose (7), base twist (6), q (12), qdot (12),
// currents (12), driver temps (12), contact flags (4)
class TraceWriter {
 public:
  TraceWriter(const std::string& path, int every_n_steps = 1);
  static std::string header();
  void log(const SimState& state);

 private:
  std::ofstream out_;
  int every_n_ = 1;
  long count_ = 0;
};

}  // namespace quadsim
