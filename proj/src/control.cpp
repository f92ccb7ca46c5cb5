#include "quadsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace quadsim {

using nlohmann::json;

void PolicyParams::validate() const {
  if (m.rows() != Action::kDim || m.cols() != Observation::kDim)
    throw ConfigError("policy matrix must be " + std::to_string(Action::kDim) +
                      "x" + std::to_string(Observation::kDim));
  if (bias.size() != Action::kDim)
    throw ConfigError("policy bias must have " + std::to_string(Action::kDim) +
                      " entries");
  if (!m.allFinite() || !bias.allFinite())
    throw ConfigError("policy parameters must be finite");
}

PolicyParams PolicyParams::zero() {
  PolicyParams p;
  p.m = Eigen::MatrixXd::Zero(Action::kDim, Observation::kDim);
  p.bias = Eigen::VectorXd::Zero(Action::kDim);
  p.name = "zero";
  return p;
}

PolicyParams load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  PolicyParams p;
  try {
    if (j.contains("name")) p.name = j.at("name").get<std::string>();
    const auto rows = j.at("M");
    p.m.resize(static_cast<long>(rows.size()),
               rows.empty() ? 0 : static_cast<long>(rows[0].size()));
    for (long i = 0; i < p.m.rows(); ++i) {
      const auto& row = rows[static_cast<size_t>(i)];
      if (static_cast<long>(row.size()) != p.m.cols())
        throw ConfigError(path + ": ragged policy matrix");
      for (long c = 0; c < p.m.cols(); ++c)
        p.m(i, c) = row[static_cast<size_t>(c)].get<double>();
    }
    const auto& bias = j.at("bias");
    p.bias.resize(static_cast<long>(bias.size()));
    for (long i = 0; i < p.bias.size(); ++i)
      p.bias(i) = bias[static_cast<size_t>(i)].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  p.validate();
  return p;
}

void save_policy(const PolicyParams& params, const std::string& path) {
  params.validate();
  json j;
  j["name"] = params.name;
  j["obs_dim"] = Observation::kDim;
  j["action_dim"] = Action::kDim;
  json rows = json::array();
  for (long i = 0; i < params.m.rows(); ++i) {
    json row = json::array();
    for (long c = 0; c < params.m.cols(); ++c) row.push_back(params.m(i, c));
    rows.push_back(row);
  }
  j["M"] = rows;
  json bias = json::array();
  for (long i = 0; i < params.bias.size(); ++i) bias.push_back(params.bias(i));
  j["bias"] = bias;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write policy file: " + path);
  out << j.dump(2) << "\n";
}

PolicyParams stabilizer_policy(const RobotModel& model) {
  PolicyParams p = PolicyParams::zero();
  p.name = "stabilizer";
  // observation indices: 0 roll, 1 pitch, 2-4 omega body, 5-7 velocity world,
  // 16-18 commanded velocity. action indices: 8-10 force, 11-13 torque.
  p.bias[10] = model.total_mass * kGravity;  // weight support
  p.m(8, 16) = 120.0;   // forward velocity tracking
  p.m(8, 5) = -120.0;
  p.m(9, 17) = 120.0;   // lateral velocity tracking
  p.m(9, 6) = -120.0;
  p.m(11, 0) = -180.0;  // roll PD
  p.m(11, 2) = -12.0;
  p.m(12, 1) = -250.0;  // pitch PD
  p.m(12, 3) = -20.0;
  p.m(13, 4) = -15.0;   // yaw damping
  return p;
}

Observation build_observation(const SimState& state, const Terrain& terrain,
                              const GaitSchedule& schedule,
                              const Vec3& velocity_cmd) {
  Observation obs;
  const Mat3 r_body = state.base_orientation.toRotationMatrix();
  const Mat3 r_slope =
      Eigen::AngleAxisd(terrain.kind == TerrainKind::Incline
                            ? -terrain.slope_angle
                            : 0.0,
                        Vec3::UnitY())
          .toRotationMatrix();
  const Mat3 rel = r_slope.transpose() * r_body;
  const double pitch = -std::asin(std::clamp(rel(2, 0), -1.0, 1.0));
  const double roll = std::atan2(rel(2, 1), rel(2, 2));

  obs.vec[0] = roll;
  obs.vec[1] = pitch;
  obs.vec.segment<3>(2) = r_body.transpose() * state.base_angular_velocity;
  obs.vec.segment<3>(5) = state.base_linear_velocity;
  const auto phases = leg_phase(state.time, schedule);
  for (int i = 0; i < kNumLegs; ++i) {
    obs.vec[8 + 2 * i] = std::sin(2.0 * kPi * phases[i].phase);
    obs.vec[9 + 2 * i] = std::cos(2.0 * kPi * phases[i].phase);
  }
  obs.vec.segment<3>(16) = velocity_cmd;
  return obs;
}

Action linear_policy(const Observation& obs, const PolicyParams& params) {
  params.validate();
  if (!obs.vec.allFinite()) throw ConfigError("observation must be finite");
  const Eigen::VectorXd a = params.m * obs.vec + params.bias;
  Action act;
  for (int i = 0; i < kNumLegs; ++i)
    act.foothold_shifts[i] = Eigen::Vector2d(a[2 * i], a[2 * i + 1]);
  act.wrench_force = a.segment<3>(8);
  act.wrench_torque = a.segment<3>(11);
  return act;
}

ForceDistribution distribute_forces(const Vec3& wrench_force,
                                    const Vec3& wrench_torque,
                                    const std::vector<Vec3>& stance_feet,
                                    const Vec3& base_position, double friction,
                                    const Vec3& normal,
                                    const std::vector<double>& weights) {
  const int k = static_cast<int>(stance_feet.size());
  if (k == 0)
    throw FlightPhaseError("force distribution requested with no stance feet");
  if (!weights.empty() && static_cast<int>(weights.size()) != k)
    throw ConfigError("force distribution weights must match stance feet");

  Eigen::MatrixXd g(6, 3 * k);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(3 * k);
  for (int i = 0; i < k; ++i) {
    const Vec3 r = stance_feet[static_cast<size_t>(i)] - base_position;
    g.block<3, 3>(0, 3 * i) = Mat3::Identity();
    Mat3 skew;
    skew << 0, -r.z(), r.y(), r.z(), 0, -r.x(), -r.y(), r.x(), 0;
    g.block<3, 3>(3, 3 * i) = skew;
    if (!weights.empty()) {
      const double wi = weights[static_cast<size_t>(i)];
      if (!(wi >= 0.0) || !std::isfinite(wi))
        throw ConfigError("force distribution weights must be finite and >= 0");
      // floor keeps the scaled grasp map well conditioned at ramp edges
      scale.segment<3>(3 * i).setConstant(std::sqrt(std::max(wi, 1e-3)));
    }
  }
  Eigen::Matrix<double, 6, 1> w;
  w << wrench_force, wrench_torque;

  // minimize sum |f_i|^2 / w_i subject to G f = w: substitute f = S u with
  // S = diag(sqrt(w_i)) and take the minimum-norm u
  const Eigen::VectorXd f =
      scale.asDiagonal() *
      Eigen::MatrixXd(g * scale.asDiagonal())
          .completeOrthogonalDecomposition()
          .solve(w);

  ForceDistribution out;
  out.residual = (g * f - w).norm();
  out.forces.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    Vec3 fi = f.segment<3>(3 * i);
    double fn = fi.dot(normal);
    if (fn < 0.0) fn = 0.0;
    Vec3 ft = fi - normal * fi.dot(normal);
    const double cap = friction * fn;
    const double ft_mag = ft.norm();
    if (ft_mag > cap) ft *= (ft_mag > 0.0 ? cap / ft_mag : 0.0);
    out.forces.push_back(normal * fn + ft);
  }
  return out;
}

Vec3 stance_torques(const Vec3& foot_force, const Vec3& q, LegId leg,
                    const RobotModel& model) {
  return jacobian(model, leg, q).transpose() * foot_force;
}

void SwingGains::validate() const {
  if ((kp.array() < 0.0).any() || (kd.array() < 0.0).any())
    throw ConfigError("swing gains must be >= 0");
}

Vec3 swing_torques(const Vec3& q, const Vec3& qdot, const Vec3& q_des,
                   const Vec3& qdot_des, const SwingGains& gains) {
  gains.validate();
  return gains.kp.cwiseProduct(q_des - q) +
         gains.kd.cwiseProduct(qdot_des - qdot);
}

void ContactEstimatorConfig::validate() const {
  if (!(low_pass_cutoff > 0.0))
    throw ConfigError("contact.low_pass_cutoff_hz must be > 0");
  if (hysteresis < 0.0) throw ConfigError("contact.hysteresis_nm must be >= 0");
  if (!(torque_threshold > hysteresis))
    throw ConfigError("contact.torque_threshold_nm must exceed hysteresis");
}

ContactEstimatorState estimate_contact(const Vec3& currents, const Vec3& /*q*/,
                                       const Vec3& /*qdot*/,
                                       const RobotModel& model,
                                       const MotorParams& motor,
                                       const ContactEstimatorConfig& config,
                                       const ContactEstimatorState& prev,
                                       double dt) {
  config.validate();
  const TransmissionSpec& spec = model.transmission(JointId::Knee);
  const double reduction = joint_reduction(JointId::Knee, spec);
  // massless-leg assumption: no gravity/friction feedforward to subtract
  const double raw =
      torque_constant(motor.kv) * currents[2] * reduction * spec.efficiency;

  ContactEstimatorState next = prev;
  const double alpha = 1.0 - std::exp(-2.0 * kPi * config.low_pass_cutoff * dt);
  next.filtered_torque = prev.filtered_torque + alpha * (raw - prev.filtered_torque);
  if (std::abs(next.filtered_torque) > config.torque_threshold) {
    next.contact = true;
  } else if (std::abs(next.filtered_torque) <
             config.torque_threshold - config.hysteresis) {
    next.contact = false;
  }
  return next;
}

Vec3 project_to_workspace(const RobotModel& model, LegId leg, const Vec3& p) {
  const double s = side_sign(leg);
  const double d = model.abad_offset;
  const double l1 = model.thigh_length, l2 = model.shank_length;

  Vec3 r = p - abad_axis_origin(model, leg);
  double rho = std::hypot(r.y(), r.z());
  const double rho_min = d + 1e-4;
  if (rho < rho_min) {
    if (rho < 1e-9) {
      r.y() = s * rho_min;
      r.z() = 0.0;
    } else {
      r.y() *= rho_min / rho;
      r.z() *= rho_min / rho;
    }
    rho = rho_min;
  }
  const double zl = -std::sqrt(rho * rho - d * d);
  const double alpha = std::atan2(r.z(), r.y()) - std::atan2(zl, s * d);
  const double xl = r.x();

  const double dist_sq = xl * xl + zl * zl;
  double cos_k =
      std::clamp((dist_sq - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  // keep away from the straight-leg singularity
  cos_k = std::min(cos_k, std::cos(deg2rad(5.0)));
  const double k = std::acos(cos_k);
  const double gamma = std::atan2(xl, -zl);
  const double phi = gamma + std::atan2(l2 * std::sin(k), l1 + l2 * std::cos(k));

  Vec3 q(s * alpha, phi, k);
  if (q[0] > kPi) q[0] -= 2.0 * kPi;
  if (q[0] <= -kPi) q[0] += 2.0 * kPi;
  q = clamp_to_limits(q, model.joint_limits).q;
  return forward_kinematics(model, leg, q);
}

void ControllerParams::validate() const {
  if (!(control_rate > 0.0)) throw ConfigError("control_rate_hz must be > 0");
  if (!(stance_height > 0.0)) throw ConfigError("stance_height_m must be > 0");
  if (height_kp < 0.0 || height_kd < 0.0)
    throw ConfigError("height gains must be >= 0");
  if (raibert_gain < 0.0) throw ConfigError("raibert_gain_s must be >= 0");
  if (velocity_ramp_time < 0.0)
    throw ConfigError("velocity_ramp_time_s must be >= 0");
  if (sway_kp < 0.0 || sway_kd < 0.0)
    throw ConfigError("sway gains must be >= 0");
  if (load_ramp < 0.0 || load_ramp > 0.5)
    throw ConfigError("load_ramp_fraction must be in [0, 0.5]");
  if (load_lead < 0.0 || load_lead > 0.25)
    throw ConfigError("load_lead_fraction must be in [0, 0.25]");
  if (sway_filter_tau < 0.0) throw ConfigError("sway_filter_tau_s must be >= 0");
  if (yaw_kp < 0.0) throw ConfigError("yaw_kp_nm_per_rad must be >= 0");
  if (touchdown_depth < 0.0)
    throw ConfigError("touchdown_depth_m must be >= 0");
  if (touchdown_preload < 0.0)
    throw ConfigError("touchdown_preload_n must be >= 0");
  swing_gains.validate();
  contact.validate();
}

Controller::Controller(const RobotModel& model, const Terrain& terrain,
                       const GaitSchedule& schedule, const PolicyParams& policy,
                       const ControllerParams& params, const Vec3& velocity_cmd)
    : model_(model),
      terrain_(terrain),
      schedule_(schedule),
      policy_(policy),
      params_(params),
      velocity_cmd_(velocity_cmd) {
  params_.validate();
  policy_.validate();
  schedule_.validate();
  terrain_.validate();
  for (auto& p : swing_start_) p = Vec3::Zero();
  for (auto& q : prev_q_des_) q = Vec3::Zero();
}

Vec3 Controller::ramped_command(double t) const {
  if (params_.velocity_ramp_time <= 0.0) return velocity_cmd_;
  const double scale = std::min(1.0, t / params_.velocity_ramp_time);
  return velocity_cmd_ * scale;
}

std::array<double, kNumJoints> Controller::tick(const SimState& state) {
  const double t = state.time;
  const double dt_ctrl =
      prev_tick_time_ < 0.0 ? control_period() : t - prev_tick_time_;
  prev_tick_time_ = t;

  const Vec3 v_cmd = ramped_command(t);
  const auto phases = leg_phase(t, schedule_);
  const Observation obs = build_observation(state, terrain_, schedule_, v_cmd);
  const Action action = linear_policy(obs, policy_);

  const Mat3 r = state.base_orientation.toRotationMatrix();
  const GroundPlane plane = terrain_.plane();

  info_ = ControlTickInfo{};
  info_.time = t;

  // proprioceptive contact estimate, for telemetry and evaluation
  for (int li = 0; li < kNumLegs; ++li) {
    Vec3 currents;
    for (int jj = 0; jj < kJointsPerLeg; ++jj)
      currents[jj] = state.actuators[li * kJointsPerLeg + jj].current;
    estimator_[li] = estimate_contact(
        currents, state.joints[li].q, state.joints[li].qdot, model_,
        params_.motor, params_.contact, estimator_[li],
        dt_ctrl > 0.0 ? dt_ctrl : control_period());
    info_.estimated_contact[li] = estimator_[li].contact;
    info_.filtered_knee_torque[li] = estimator_[li].filtered_torque;
  }

  // body wrench: policy output plus height regulation along the terrain normal
  const double height = plane.signed_distance(state.base_position);
  const double height_rate = plane.normal.dot(state.base_linear_velocity);
  Vec3 wrench_force =
      action.wrench_force +
      plane.normal * (params_.height_kp * (params_.stance_height - height) -
                      params_.height_kd * height_rate);
  Vec3 wrench_torque = action.wrench_torque;

  // A leg's load weight leads its liftoff and lags its touchdown. The sway
  // target uses the raw weight (a lifting leg counts for nothing), while the
  // force allocation keeps a small floor so the solve stays tame.
  constexpr double kMinLoadShare = 0.05;
  // force control only makes sense against the ground: a scheduled-stance
  // foot that is airborne (the body rocked off it, or it has not quite
  // landed) would be driven into the ground at full commanded force through
  // the leg, so it is position-held onto the terrain instead and dropped
  // from the allocation
  constexpr double kContactClearance = 2e-3;  // m
  std::array<Vec3, kNumLegs> feet_world;
  std::array<bool, kNumLegs> force_controlled{};
  std::vector<Vec3> stance_feet;
  std::vector<double> stance_weights;
  Vec3 centroid = Vec3::Zero();
  double total = 0.0;
  for (int li = 0; li < kNumLegs; ++li) {
    info_.scheduled_stance[li] = phases[li].stance;
    feet_world[li] = foot_position_world(state, model_, static_cast<LegId>(li));
    force_controlled[li] = false;
    // weights are evaluated a little ahead of the schedule: the body needs
    // its weight off a leg before the leg lifts, not at the moment it lifts.
    // A wrapped phase means the leg lands within the lead window, so it
    // starts counting toward the centroid at its current (near-touchdown)
    // position.
    double ph = phases[li].phase + params_.load_lead;
    if (ph >= 1.0) ph -= 1.0;
    const double w = stance_load_weight(ph, schedule_.duty_factor,
                                        params_.load_ramp, has_swung_[li]);
    centroid += w * plane.project(feet_world[li]);
    total += w;
    if (phases[li].stance &&
        plane.signed_distance(feet_world[li]) <= kContactClearance) {
      force_controlled[li] = true;
      stance_feet.push_back(feet_world[li]);
      stance_weights.push_back(std::max(w, kMinLoadShare));
    }
  }

  // weight shift: steer the point where the CoM drops vertically onto the
  // terrain toward the load-weighted support centroid, but only across the
  // direction of travel. Forward progress is owned by the velocity tracking;
  // chasing the centroid's fore-aft swing would fight it, and the moment
  // balance for a large fore-aft force unloads whole legs. The load ramps
  // lead each liftoff, so the shift happens while all feet still share load.
  {
    if (total > 1e-6) {
      centroid /= total;
      // first-order lag irons out any residual kinks in the target; its
      // rate feeds forward so the body tracks the moving target instead of
      // trailing it by the servo lag
      Vec3 target_vel = Vec3::Zero();
      if (!have_sway_target_) {
        sway_target_ = centroid;
        have_sway_target_ = true;
      } else if (params_.sway_filter_tau > 0.0) {
        const double alpha =
            1.0 - std::exp(-dt_ctrl / params_.sway_filter_tau);
        const Vec3 prev = sway_target_;
        sway_target_ += alpha * (centroid - sway_target_);
        if (dt_ctrl > 0.0) target_vel = (sway_target_ - prev) / dt_ctrl;
      } else {
        sway_target_ = centroid;
      }
      Vec3 err = sway_target_ - plane.project_vertical(state.base_position);
      err -= plane.normal * plane.normal.dot(err);
      Vec3 rel_v = target_vel - state.base_linear_velocity;
      rel_v -= plane.normal * plane.normal.dot(rel_v);
      Vec3 u =
          velocity_cmd_.squaredNorm() > 1e-12 ? velocity_cmd_ : Vec3::UnitX();
      u -= plane.normal * plane.normal.dot(u);
      if (u.squaredNorm() > 1e-12) {
        u.normalize();
        err -= u * u.dot(err);
        rel_v -= u * u.dot(rel_v);
      }
      wrench_force += params_.sway_kp * err + params_.sway_kd * rel_v;
    }
  }

  // hold the heading the velocity command is expressed in
  wrench_torque.z() += -params_.yaw_kp * std::atan2(r(1, 0), r(0, 0));

  info_.wrench_force = wrench_force;
  info_.wrench_torque = wrench_torque;

  ForceDistribution dist;
  if (!stance_feet.empty()) {
    dist = distribute_forces(wrench_force, wrench_torque, stance_feet,
                             state.base_position,
                             terrain_.friction_coefficient, plane.normal,
                             stance_weights);
    info_.distribution_residual = dist.residual;
  }

  std::array<double, kNumJoints> cmds{};
  size_t stance_idx = 0;
  for (int li = 0; li < kNumLegs; ++li) {
    const LegId leg = static_cast<LegId>(li);
    const LegState& js = state.joints[li];
    Vec3 tau = Vec3::Zero();

    if (phases[li].stance && force_controlled[li]) {
      const Vec3 f_grf = dist.forces[stance_idx++];
      const Vec3 push_body = r.transpose() * (-f_grf);
      tau = stance_torques(push_body, js.q, leg, model_);
      was_stance_[li] = true;
      have_prev_q_des_[li] = false;
    } else if (phases[li].stance) {
      // airborne but scheduled to stand: press the foot onto the terrain
      // compliantly and wait for contact
      const Vec3 p_world =
          feet_world[li] -
          plane.normal *
              (plane.signed_distance(feet_world[li]) + params_.touchdown_depth);
      const Vec3 p_body = r.transpose() * (p_world - state.base_position);
      Vec3 q_des;
      if (auto q = try_inverse_kinematics(model_, leg, p_body)) {
        q_des = *q;
      } else {
        q_des = inverse_kinematics(model_, leg,
                                   project_to_workspace(model_, leg, p_body));
      }
      tau = swing_torques(js.q, js.qdot, q_des, Vec3::Zero(),
                          params_.swing_gains);
      was_stance_[li] = true;
      have_prev_q_des_[li] = false;
    } else {
      if (was_stance_[li]) {
        // start the swing from the surface, not from the pressed-in foot
        // position, so the trajectory exits the ground without a re-graze
        Vec3 p = foot_position_world(state, model_, leg);
        const double sd = plane.signed_distance(p);
        if (sd < 0.0) p -= plane.normal * sd;
        swing_start_[li] = p;
        was_stance_[li] = false;
        has_swung_[li] = true;
        have_prev_q_des_[li] = false;
      }
      const double duty = schedule_.duty_factor;
      const double s =
          std::clamp((phases[li].phase - duty) / (1.0 - duty), 0.0, 1.0);

      if (s >= 0.7 &&
          plane.signed_distance(feet_world[li]) <= kContactClearance) {
        // touchdown reflex: the descending foot has met the ground, so stop
        // chasing the rest of the trajectory and preload the leg instead.
        // The loading shows up in the joint currents at once, which is what
        // the proprioceptive touchdown detector listens for.
        const Vec3 push_body =
            r.transpose() * (plane.normal * (-params_.touchdown_preload));
        tau = stance_torques(push_body, js.q, leg, model_);
        have_prev_q_des_[li] = false;
      } else {
        // project the hip along gravity, not the terrain normal: on a slope
        // the foot must sit under the hip in the weight-bearing sense
        const Vec3 hip_world =
            state.base_position + r * model_.hip_offset(leg);
        const Vec3 hip_proj = plane.project_vertical(hip_world);
        Vec3 target = foothold_target(v_cmd, state.base_linear_velocity,
                                      schedule_.stance_duration(), hip_proj,
                                      plane, params_.raibert_gain);
        const Eigen::Vector2d& shift = action.foothold_shifts[li];
        target = plane.project(target + Vec3(shift.x(), shift.y(), 0.0));
        // overshoot the plane so the foot meets the ground under swing PD
        target -= plane.normal * params_.touchdown_depth;

        const Vec3 p_world = swing_trajectory(s, swing_start_[li], target,
                                              schedule_.swing_height);
        Vec3 p_body = r.transpose() * (p_world - state.base_position);

        Vec3 q_des;
        if (auto q = try_inverse_kinematics(model_, leg, p_body)) {
          q_des = *q;
        } else {
          ++unreachable_count_;
          q_des = inverse_kinematics(
              model_, leg, project_to_workspace(model_, leg, p_body));
        }
        Vec3 qdot_des = Vec3::Zero();
        if (have_prev_q_des_[li] && dt_ctrl > 0.0)
          qdot_des = (q_des - prev_q_des_[li]) / dt_ctrl;
        prev_q_des_[li] = q_des;
        have_prev_q_des_[li] = true;

        tau = swing_torques(js.q, js.qdot, q_des, qdot_des,
                            params_.swing_gains);
      }
    }

    for (int jj = 0; jj < kJointsPerLeg; ++jj)
      cmds[li * kJointsPerLeg + jj] = tau[jj];
  }
  return cmds;
}

}  // namespace quadsim
