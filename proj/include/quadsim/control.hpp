#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadsim/gait.hpp"
#include "quadsim/kinematics.hpp"
#include "quadsim/morphology.hpp"
#include "quadsim/simworld.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

// observation layout (19 entries):
//   0    roll relative to the terrain plane, rad
//   1    pitch relative to the terrain plane, rad
//   2-4  base angular velocity, body frame, rad/s
//   5-7  base linear velocity, world frame, m/s
//   8-15 sin/cos of each leg's gait phase (FL FR RL RR)
//   16-18 commanded velocity, world frame, m/s
struct Observation {
  static constexpr int kDim = 19;
  Eigen::Matrix<double, kDim, 1> vec = Eigen::Matrix<double, kDim, 1>::Zero();
};

// action layout (14 entries): 4 foothold xy shifts (m), then a body wrench
// (force N, torque Nm) about the base, world frame
struct Action {
  static constexpr int kDim = 14;
  std::array<Eigen::Vector2d, kNumLegs> foothold_shifts;
  Vec3 wrench_force = Vec3::Zero();
  Vec3 wrench_torque = Vec3::Zero();
};

struct PolicyParams {
  Eigen::MatrixXd m;     // kDim x Observation::kDim
  Eigen::VectorXd bias;  // kDim
  std::string name = "unnamed";

  void validate() const;
  static PolicyParams zero();
};

PolicyParams load_policy(const std::string& path);
void save_policy(const PolicyParams& params, const std::string& path);

// hand-tuned linear stabilizer: weight support bias, attitude PD, velocity
// tracking, yaw damping; foothold shift rows left at zero
PolicyParams stabilizer_policy(const RobotModel& model);

Observation build_observation(const SimState& state, const Terrain& terrain,
                              const GaitSchedule& schedule,
                              const Vec3& velocity_cmd);

Action linear_policy(const Observation& obs, const PolicyParams& params);

struct FlightPhaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ForceDistribution {
  std::vector<Vec3> forces;  // ground reaction per stance foot, world frame
  double residual = 0.0;     // |G f - w| before clamping
};

// weighted minimum-norm least squares on the 6 x 3k grasp map, then friction
// clamp. `weights` biases the allocation: a foot with half the weight takes
// roughly half the force, so ramping a weight transfers load gradually.
// Empty means equal weights.
ForceDistribution distribute_forces(const Vec3& wrench_force,
                                    const Vec3& wrench_torque,
                                    const std::vector<Vec3>& stance_feet,
                                    const Vec3& base_position, double friction,
                                    const Vec3& normal = Vec3::UnitZ(),
                                    const std::vector<double>& weights = {});

// foot_force is the force the foot applies to the ground, torso frame
Vec3 stance_torques(const Vec3& foot_force, const Vec3& q, LegId leg,
                    const RobotModel& model);

struct SwingGains {
  Vec3 kp = Vec3(80.0, 80.0, 60.0);  // Nm/rad
  Vec3 kd = Vec3(1.0, 1.0, 1.0);     // Nm s/rad
  void validate() const;
};

Vec3 swing_torques(const Vec3& q, const Vec3& qdot, const Vec3& q_des,
                   const Vec3& qdot_des, const SwingGains& gains);

struct ContactEstimatorConfig {
  double torque_threshold = 2.0;  // Nm at the knee
  double low_pass_cutoff = 60.0;  // Hz
  double hysteresis = 0.5;        // Nm
  void validate() const;
};

struct ContactEstimatorState {
  double filtered_torque = 0.0;
  bool contact = false;
};

// knee-current torque estimate through the transmission, low-passed, with
// assert/deassert hysteresis
ContactEstimatorState estimate_contact(const Vec3& currents, const Vec3& q,
                                       const Vec3& qdot,
                                       const RobotModel& model,
                                       const MotorParams& motor,
                                       const ContactEstimatorConfig& config,
                                       const ContactEstimatorState& prev,
                                       double dt);

// nearest point of the (conservative) reachable shell for a body-frame target
Vec3 project_to_workspace(const RobotModel& model, LegId leg, const Vec3& p);

struct ControllerParams {
  double control_rate = 400.0;   // Hz
  double stance_height = 0.35;   // m, desired base height above terrain
  double height_kp = 2000.0;     // N/m
  double height_kd = 300.0;      // N s/m
  double raibert_gain = 0.03;    // s
  double velocity_ramp_time = 0.5;  // s
  // weight-shift servo: pulls the point where the CoM's vertical drops onto
  // the terrain toward the load-weighted support centroid, acting only across
  // the direction of travel (fore-aft progress belongs to velocity tracking).
  // Because the load ramps lead each liftoff, the target moves early and
  // smoothly, which keeps static gaits (one leg swinging at a time) from
  // tipping over a support edge.
  double sway_kp = 800.0;         // N/m
  double sway_kd = 200.0;         // N s/m
  double load_ramp = 0.15;        // fraction of stance spent blending load
  double load_lead = 0.05;        // fraction of cycle the load shift leads
  double sway_filter_tau = 0.05;  // s, extra smoothing of the sway target
  double yaw_kp = 40.0;           // Nm/rad, holds the commanded heading
  // swing trajectories aim this far below the terrain so the foot settles
  // onto the ground compliantly, under swing PD, before stance force control
  // takes over; without it the fresh stance leg punches an airborne foot down
  double touchdown_depth = 0.003;  // m
  // once the descending foot reaches the ground, press with this much force
  // instead of tracking the rest of the trajectory; makes the new contact
  // visible in the joint currents immediately
  double touchdown_preload = 30.0;  // N
  SwingGains swing_gains;
  ContactEstimatorConfig contact;
  MotorParams motor;  // for the current-based torque estimate
  void validate() const;
};

struct ControlTickInfo {
  double time = 0.0;
  std::array<bool, kNumLegs> scheduled_stance = {true, true, true, true};
  std::array<bool, kNumLegs> estimated_contact = {false, false, false, false};
  std::array<double, kNumLegs> filtered_knee_torque = {0.0, 0.0, 0.0, 0.0};
  Vec3 wrench_force = Vec3::Zero();
  Vec3 wrench_torque = Vec3::Zero();
  double distribution_residual = 0.0;
};

class Controller {
 public:
  Controller(const RobotModel& model, const Terrain& terrain,
             const GaitSchedule& schedule, const PolicyParams& policy,
             const ControllerParams& params, const Vec3& velocity_cmd);

  // joint-side torque commands for the current state; call at control_rate
  std::array<double, kNumJoints> tick(const SimState& state);

  const ControlTickInfo& last_tick_info() const { return info_; }
  int unreachable_target_count() const { return unreachable_count_; }
  double control_period() const { return 1.0 / params_.control_rate; }

 private:
  Vec3 ramped_command(double t) const;

  const RobotModel& model_;
  Terrain terrain_;
  GaitSchedule schedule_;
  PolicyParams policy_;
  ControllerParams params_;
  Vec3 velocity_cmd_;

  std::array<ContactEstimatorState, kNumLegs> estimator_;
  std::array<bool, kNumLegs> was_stance_ = {true, true, true, true};
  // false until the leg's first liftoff: its touchdown load ramp must not
  // apply while it is still standing from the initial pose
  std::array<bool, kNumLegs> has_swung_ = {false, false, false, false};
  std::array<Vec3, kNumLegs> swing_start_;   // world
  std::array<Vec3, kNumLegs> prev_q_des_;    // for qdot_des differencing
  std::array<bool, kNumLegs> have_prev_q_des_ = {false, false, false, false};
  Vec3 sway_target_ = Vec3::Zero();  // filtered support centroid (world)
  bool have_sway_target_ = false;
  double prev_tick_time_ = -1.0;
  ControlTickInfo info_;
  int unreachable_count_ = 0;
};

}  // namespace quadsim
