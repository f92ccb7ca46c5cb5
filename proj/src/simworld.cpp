#include "quadsim/simworld.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace quadsim {

void Terrain::validate() const {
  if (friction_coefficient < 0.0)
    throw ConfigError("terrain.friction_coefficient must be >= 0");
  if (!(contact_stiffness > 0.0))
    throw ConfigError("terrain.contact_stiffness_n_per_m must be > 0");
  if (contact_damping < 0.0)
    throw ConfigError("terrain.contact_damping_ns_per_m must be >= 0");
  if (tangential_damping < 0.0)
    throw ConfigError("terrain.tangential_damping_ns_per_m must be >= 0");
  if (std::abs(slope_angle) > deg2rad(30.0))
    throw ConfigError("terrain.slope_angle must be within +/-30 deg");
  if (kind == TerrainKind::Flat && slope_angle != 0.0)
    throw ConfigError("flat terrain requires slope_angle = 0");
}

GroundPlane Terrain::plane() const {
  GroundPlane p;
  p.point = Vec3::Zero();
  if (kind == TerrainKind::Incline)
    p.normal = Vec3(-std::sin(slope_angle), 0.0, std::cos(slope_angle));
  return p;
}

GroundSample ground_height_and_normal(double x, double /*y*/,
                                      const Terrain& terrain) {
  GroundSample s;
  if (terrain.kind == TerrainKind::Incline) {
    s.height = x * std::tan(terrain.slope_angle);
    s.normal = Vec3(-std::sin(terrain.slope_angle), 0.0,
                    std::cos(terrain.slope_angle));
  }
  return s;
}

Vec3 contact_force(const Vec3& foot_pos, const Vec3& foot_vel,
                   const Terrain& terrain) {
  const GroundPlane plane = terrain.plane();
  const double dist = plane.signed_distance(foot_pos);
  if (dist >= 0.0) return Vec3::Zero();

  const Vec3& n = plane.normal;
  const double penetration = -dist;
  const double penetration_rate = -n.dot(foot_vel);
  double fn = terrain.contact_stiffness * penetration +
              terrain.contact_damping * penetration_rate;
  if (fn <= 0.0) return Vec3::Zero();

  const Vec3 v_t = foot_vel - n * n.dot(foot_vel);
  Vec3 ft = -terrain.tangential_damping * v_t;
  const double cap = terrain.friction_coefficient * fn;
  const double ft_mag = ft.norm();
  if (ft_mag > cap) ft *= cap / ft_mag;
  return n * fn + ft;
}

void SimParams::validate() const {
  if (!(dt > 0.0 && dt <= 2e-3))
    throw ConfigError("sim.dt_s must be in (0, 0.002]");
  if (joint_viscous_friction < 0.0)
    throw ConfigError("sim.joint_viscous_friction must be >= 0");
  motor.validate();
  thermal.validate();
}

Vec3 foot_position_world(const SimState& state, const RobotModel& model,
                         LegId leg) {
  const Mat3 r = state.base_orientation.toRotationMatrix();
  return state.base_position +
         r * forward_kinematics(model, leg, state.joints[static_cast<int>(leg)].q);
}

Vec3 foot_velocity_world(const SimState& state, const RobotModel& model,
                         LegId leg) {
  const Mat3 r = state.base_orientation.toRotationMatrix();
  const LegState& js = state.joints[static_cast<int>(leg)];
  const Vec3 arm = r * forward_kinematics(model, leg, js.q);
  return state.base_linear_velocity + state.base_angular_velocity.cross(arm) +
         r * (jacobian(model, leg, js.q) * js.qdot);
}

namespace {

std::string state_snapshot(const SimState& s) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "time " << s.time << "\n";
  os << "base_position " << s.base_position.transpose() << "\n";
  os << "base_orientation " << s.base_orientation.w() << " "
     << s.base_orientation.x() << " " << s.base_orientation.y() << " "
     << s.base_orientation.z() << "\n";
  os << "base_linear_velocity " << s.base_linear_velocity.transpose() << "\n";
  os << "base_angular_velocity " << s.base_angular_velocity.transpose() << "\n";
  for (LegId leg : kLegOrder) {
    const LegState& js = s.joints[static_cast<int>(leg)];
    os << to_string(leg) << " q " << js.q.transpose() << " qdot "
       << js.qdot.transpose() << "\n";
  }
  return os.str();
}

bool all_finite(const SimState& s) {
  auto ok3 = [](const Vec3& v) { return v.allFinite(); };
  if (!ok3(s.base_position) || !ok3(s.base_linear_velocity) ||
      !ok3(s.base_angular_velocity) || !ok3(s.base_angular_momentum))
    return false;
  if (!std::isfinite(s.base_orientation.w()) ||
      !std::isfinite(s.base_orientation.x()) ||
      !std::isfinite(s.base_orientation.y()) ||
      !std::isfinite(s.base_orientation.z()))
    return false;
  for (const LegState& js : s.joints)
    if (!ok3(js.q) || !ok3(js.qdot)) return false;
  for (const ActuatorState& a : s.actuators)
    if (!std::isfinite(a.current) || !std::isfinite(a.driver_temp) ||
        !std::isfinite(a.sink_temp) || !std::isfinite(a.rotor_velocity))
      return false;
  return true;
}

Quat integrate_orientation(const Quat& q, const Vec3& omega_world, double dt) {
  const double angle = omega_world.norm() * dt;
  Quat dq = Quat::Identity();
  if (angle > 0.0) {
    dq = Quat(Eigen::AngleAxisd(angle, omega_world.normalized()));
  }
  Quat out = dq * q;
  out.normalize();
  return out;
}

struct LegWorkspace {
  Vec3 force_world = Vec3::Zero();
  Vec3 foot_world = Vec3::Zero();
  bool contact = false;
};

}  // namespace

SimState step(const SimState& state,
              const std::array<double, kNumJoints>& joint_torque_cmds,
              const Terrain& terrain, const RobotModel& model,
              const SimParams& params) {
  params.validate();
  terrain.validate();
  const double dt = params.dt;
  const Mat3 r = state.base_orientation.toRotationMatrix();
  const auto reductions = leg_reductions(model);
  const double kt = torque_constant(params.motor.kv);

  SimState next = state;
  std::array<LegWorkspace, kNumLegs> work;

  // per-leg stage: contact force, implicit joint-velocity update, actuator
  // electrical/thermal update. legs are independent; writes are disjoint.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (params.parallel_legs)
#endif
  for (int li = 0; li < kNumLegs; ++li) {
    const LegId leg = static_cast<LegId>(li);
    const LegState& js = state.joints[li];

    const Mat3 j_body = jacobian(model, leg, js.q);
    const Vec3 p_body = forward_kinematics(model, leg, js.q);
    const Vec3 arm = r * p_body;
    const Vec3 p_world = state.base_position + arm;
    const Vec3 v_world = state.base_linear_velocity +
                         state.base_angular_velocity.cross(arm) +
                         r * (j_body * js.qdot);

    const Vec3 f_world = contact_force(p_world, v_world, terrain);
    work[li].force_world = f_world;
    work[li].foot_world = p_world;
    work[li].contact = f_world.dot(terrain.plane().normal) > 0.0;

    // achieved joint torques through the actuator envelope
    Vec3 tau_ach;
    for (int jj = 0; jj < kJointsPerLeg; ++jj) {
      const int idx = li * kJointsPerLeg + jj;
      const double reduction = reductions[jj];
      const double eff =
          model.transmission(static_cast<JointId>(jj)).efficiency;
      const double cmd_rotor = joint_torque_cmds[idx] / (reduction * eff);
      TorqueCommandResult res = apply_torque_command(
          cmd_rotor, state.actuators[idx], params.motor, dt);
      next.actuators[idx] = res.state;
      tau_ach[jj] = res.achieved_torque * reduction * eff;
    }

    // implicit treatment of contact damping keeps the stiff damper stable:
    // (Jr + dt b I + dt K) qdot+ = Jr qdot + dt (tau + J^T R^T f) + dt K qdot
    // with K = J^T R^T D R J, D the contact damping matrix
    Vec3 jr;
    for (int jj = 0; jj < kJointsPerLeg; ++jj)
      jr[jj] = reflected_inertia(params.motor.rotor_inertia, reductions[jj]);
    Mat3 m = Mat3::Zero();
    m.diagonal() = jr.array() + dt * params.joint_viscous_friction;
    Vec3 rhs = jr.cwiseProduct(js.qdot) +
               dt * (tau_ach + j_body.transpose() * (r.transpose() * f_world));
    if (work[li].contact) {
      const Vec3 n = terrain.plane().normal;
      const Mat3 d_world =
          terrain.contact_damping * (n * n.transpose()) +
          terrain.tangential_damping * (Mat3::Identity() - n * n.transpose());
      const Mat3 k =
          j_body.transpose() * r.transpose() * d_world * r * j_body;
      m += dt * k;
      rhs += dt * (k * js.qdot);
    }
    Vec3 qdot_next = m.ldlt().solve(rhs);
    Vec3 q_next = js.q + dt * qdot_next;

    // re-evaluate the contact force at the post-solve foot velocity: the
    // implicit damper above reacted against the new joint velocity, and the
    // base must receive that same force (action equals reaction). Handing
    // the base the pre-solve force lets the stiff damper do net positive
    // work every step, which pumps a base rocking oscillation.
    if (work[li].contact) {
      const Vec3 v_new = state.base_linear_velocity +
                         state.base_angular_velocity.cross(arm) +
                         r * (j_body * qdot_next);
      work[li].force_world = contact_force(p_world, v_new, terrain);
      work[li].contact =
          work[li].force_world.dot(terrain.plane().normal) > 0.0;
    }

    if (params.enforce_joint_limits) {
      for (int jj = 0; jj < kJointsPerLeg; ++jj) {
        if (q_next[jj] < model.joint_limits.lower[jj]) {
          q_next[jj] = model.joint_limits.lower[jj];
          if (qdot_next[jj] < 0.0) qdot_next[jj] = 0.0;
        } else if (q_next[jj] > model.joint_limits.upper[jj]) {
          q_next[jj] = model.joint_limits.upper[jj];
          if (qdot_next[jj] > 0.0) qdot_next[jj] = 0.0;
        }
      }
    }
    next.joints[li].q = q_next;
    next.joints[li].qdot = qdot_next;
    next.in_contact[li] = work[li].contact;

    for (int jj = 0; jj < kJointsPerLeg; ++jj) {
      const int idx = li * kJointsPerLeg + jj;
      ActuatorState& act = next.actuators[idx];
      act.rotor_velocity = reductions[jj] * qdot_next[jj];
      act.rotor_angle = reductions[jj] * q_next[jj];
      const double power =
          electrical_power(act.current, params.motor, act.rotor_velocity,
                           kt * act.current);
      act = thermal_step(power, act, params.thermal, dt);
    }
  }

  // base stage: fixed-order force sum keeps runs bit-identical
  Vec3 force = Vec3(0.0, 0.0, -model.total_mass * kGravity);
  Vec3 torque = Vec3::Zero();
  for (int li = 0; li < kNumLegs; ++li) {
    force += work[li].force_world;
    torque += (work[li].foot_world - state.base_position)
                  .cross(work[li].force_world);
  }

  const Vec3 accel = force / model.total_mass;
  next.base_linear_acceleration = accel;
  next.base_linear_velocity = state.base_linear_velocity + dt * accel;
  next.base_angular_momentum = state.base_angular_momentum + dt * torque;

  const Mat3 inertia_world = r * model.base_inertia() * r.transpose();
  next.base_angular_velocity =
      inertia_world.ldlt().solve(next.base_angular_momentum);

  next.base_position = state.base_position + dt * next.base_linear_velocity;
  next.base_orientation = integrate_orientation(
      state.base_orientation, next.base_angular_velocity, dt);
  next.time = state.time + dt;

  if (!all_finite(next))
    throw SimulationFault("non-finite simulation state", state_snapshot(next));
  return next;
}

void set_base_angular_velocity(SimState& state, const RobotModel& model,
                               const Vec3& omega_world) {
  const Mat3 r = state.base_orientation.toRotationMatrix();
  state.base_angular_velocity = omega_world;
  state.base_angular_momentum =
      r * model.base_inertia() * r.transpose() * omega_world;
}

ImuReading Imu::read(const SimState& state) {
  const Mat3 r = state.base_orientation.toRotationMatrix();
  ImuReading out;
  out.orientation = state.base_orientation;
  out.angular_velocity = r.transpose() * state.base_angular_velocity;
  const Vec3 gravity(0.0, 0.0, -kGravity);
  out.specific_force =
      r.transpose() * (state.base_linear_acceleration - gravity);
  if (noise_.enabled) {
    std::normal_distribution<double> gyro(0.0, noise_.gyro_stddev);
    std::normal_distribution<double> accel(0.0, noise_.accel_stddev);
    for (int i = 0; i < 3; ++i) out.angular_velocity[i] += gyro(rng_);
    for (int i = 0; i < 3; ++i) out.specific_force[i] += accel(rng_);
  }
  return out;
}

ImuReading imu_readout(const SimState& state) {
  Imu imu;
  return imu.read(state);
}

SimState initial_standing_state(const RobotModel& model, const Terrain& terrain,
                                double stance_height, const SimParams& params) {
  params.validate();
  terrain.validate();
  model.validate();

  SimState s;
  const GroundPlane plane = terrain.plane();
  s.base_orientation = Quat(Eigen::AngleAxisd(
      terrain.kind == TerrainKind::Incline ? -terrain.slope_angle : 0.0,
      Vec3::UnitY()));
  s.base_position = plane.normal * stance_height;

  // preset the static spring compression so the start is near equilibrium
  const double normal_load =
      model.total_mass * kGravity * plane.normal.z() / kNumLegs;
  const double penetration = normal_load / terrain.contact_stiffness;

  for (int li = 0; li < kNumLegs; ++li) {
    const LegId leg = static_cast<LegId>(li);
    const Vec3 foot_body =
        model.hip_offset(leg) + Vec3(0.0, 0.0, -(stance_height + penetration));
    s.joints[li].leg_id = leg;
    s.joints[li].q = inverse_kinematics(model, leg, foot_body);
    s.joints[li].qdot = Vec3::Zero();
    s.in_contact[li] = true;
  }

  const auto reductions = leg_reductions(model);
  for (int li = 0; li < kNumLegs; ++li) {
    for (int jj = 0; jj < kJointsPerLeg; ++jj) {
      ActuatorState& act = s.actuators[li * kJointsPerLeg + jj];
      act.rotor_angle = reductions[jj] * s.joints[li].q[jj];
      act.rotor_velocity = 0.0;
      act.driver_temp = params.thermal.ambient;
      act.sink_temp = params.thermal.ambient;
    }
  }
  return s;
}

TraceWriter::TraceWriter(const std::string& path, int every_n_steps)
    : out_(path), every_n_(every_n_steps) {
  if (!out_) throw ConfigError("cannot open trace file: " + path);
  if (every_n_ < 1) throw ConfigError("trace cadence must be >= 1");
  out_ << header() << "\n";
}

std::string TraceWriter::header() {
  std::ostringstream os;
  os << "time,base_x,base_y,base_z,quat_w,quat_x,quat_y,quat_z,"
     << "vel_x,vel_y,vel_z,omega_x,omega_y,omega_z";
  for (const char* field : {"q", "qdot", "current", "driver_temp"})
    for (LegId leg : kLegOrder)
      for (int jj = 0; jj < kJointsPerLeg; ++jj)
        os << "," << field << "_" << to_string(leg) << "_"
           << to_string(static_cast<JointId>(jj));
  for (LegId leg : kLegOrder) os << ",contact_" << to_string(leg);
  return os.str();
}

void TraceWriter::log(const SimState& s) {
  if (count_++ % every_n_ != 0) return;
  out_ << std::setprecision(9);
  out_ << s.time;
  for (int i = 0; i < 3; ++i) out_ << "," << s.base_position[i];
  out_ << "," << s.base_orientation.w() << "," << s.base_orientation.x() << ","
       << s.base_orientation.y() << "," << s.base_orientation.z();
  for (int i = 0; i < 3; ++i) out_ << "," << s.base_linear_velocity[i];
  for (int i = 0; i < 3; ++i) out_ << "," << s.base_angular_velocity[i];
  for (const LegState& js : s.joints)
    for (int jj = 0; jj < kJointsPerLeg; ++jj) out_ << "," << js.q[jj];
  for (const LegState& js : s.joints)
    for (int jj = 0; jj < kJointsPerLeg; ++jj) out_ << "," << js.qdot[jj];
  for (int i = 0; i < kNumJoints; ++i) out_ << "," << s.actuators[i].current;
  for (int i = 0; i < kNumJoints; ++i)
    out_ << "," << s.actuators[i].driver_temp;
  for (bool c : s.in_contact) out_ << "," << (c ? 1 : 0);
  out_ << "\n";
}

}  // namespace quadsim
