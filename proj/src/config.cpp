#include "quadsim/config.hpp"

#include <fstream>

#include "json_io.hpp"

namespace quadsim {

using nlohmann::json;

void SystemConfig::validate() const {
  robot.validate();
  motor.validate();
  thermal_with_sink.validate();
  thermal_without_sink.validate();
  terrain.validate();
  sim.validate();
  controller.validate();
  bus.validate();
  trot.validate();
  crawl.validate();
  if (trace_every_n < 1) throw ConfigError("trace_every_n must be >= 1");
}

void SystemConfig::sync_derived() {
  sim.motor = motor;
  sim.thermal = use_heatsink ? thermal_with_sink : thermal_without_sink;
  controller.motor = motor;
}

SystemConfig default_system_config() {
  SystemConfig c;
  c.sync_derived();
  return c;
}

namespace {

json motor_to_json(const MotorParams& m) {
  return json{{"_note", "electrical values are calibrated placeholders"},
              {"kv_rpm_per_v", m.kv},
              {"phase_resistance_ohm", m.phase_resistance},
              {"current_limit_a", m.current_limit},
              {"bus_voltage_v", m.bus_voltage},
              {"rotor_inertia_kgm2", m.rotor_inertia}};
}

MotorParams motor_from_json(const json& j, MotorParams m) {
  m.kv = get_or(j, "kv_rpm_per_v", m.kv);
  m.phase_resistance = get_or(j, "phase_resistance_ohm", m.phase_resistance);
  m.current_limit = get_or(j, "current_limit_a", m.current_limit);
  m.bus_voltage = get_or(j, "bus_voltage_v", m.bus_voltage);
  m.rotor_inertia = get_or(j, "rotor_inertia_kgm2", m.rotor_inertia);
  return m;
}

json thermal_to_json(const ThermalParams& t) {
  return json{{"driver_capacitance_j_per_k", t.driver_capacitance},
              {"sink_capacitance_j_per_k", t.sink_capacitance},
              {"driver_to_sink_resistance_k_per_w", t.driver_to_sink_resistance},
              {"sink_to_ambient_resistance_k_per_w", t.sink_to_ambient_resistance},
              {"ambient_c", t.ambient},
              {"trip_temperature_c", t.trip_temperature}};
}

ThermalParams thermal_from_json(const json& j, ThermalParams t) {
  t.driver_capacitance = get_or(j, "driver_capacitance_j_per_k", t.driver_capacitance);
  t.sink_capacitance = get_or(j, "sink_capacitance_j_per_k", t.sink_capacitance);
  t.driver_to_sink_resistance =
      get_or(j, "driver_to_sink_resistance_k_per_w", t.driver_to_sink_resistance);
  t.sink_to_ambient_resistance =
      get_or(j, "sink_to_ambient_resistance_k_per_w", t.sink_to_ambient_resistance);
  t.ambient = get_or(j, "ambient_c", t.ambient);
  t.trip_temperature = get_or(j, "trip_temperature_c", t.trip_temperature);
  return t;
}

json terrain_to_json(const Terrain& t) {
  return json{{"_note", "contact values are placeholders, not measured"},
              {"friction_coefficient", t.friction_coefficient},
              {"contact_stiffness_n_per_m", t.contact_stiffness},
              {"contact_damping_ns_per_m", t.contact_damping},
              {"tangential_damping_ns_per_m", t.tangential_damping}};
}

Terrain terrain_from_json(const json& j, Terrain t) {
  t.friction_coefficient = get_or(j, "friction_coefficient", t.friction_coefficient);
  t.contact_stiffness = get_or(j, "contact_stiffness_n_per_m", t.contact_stiffness);
  t.contact_damping = get_or(j, "contact_damping_ns_per_m", t.contact_damping);
  t.tangential_damping =
      get_or(j, "tangential_damping_ns_per_m", t.tangential_damping);
  return t;
}

json sim_to_json(const SimParams& s) {
  return json{{"dt_s", s.dt},
              {"joint_viscous_friction_nms_per_rad", s.joint_viscous_friction},
              {"enforce_joint_limits", s.enforce_joint_limits},
              {"parallel_legs", s.parallel_legs}};
}

SimParams sim_from_json(const json& j, SimParams s) {
  s.dt = get_or(j, "dt_s", s.dt);
  s.joint_viscous_friction =
      get_or(j, "joint_viscous_friction_nms_per_rad", s.joint_viscous_friction);
  s.enforce_joint_limits = get_or(j, "enforce_joint_limits", s.enforce_joint_limits);
  s.parallel_legs = get_or(j, "parallel_legs", s.parallel_legs);
  return s;
}

json controller_to_json(const ControllerParams& c) {
  return json{
      {"control_rate_hz", c.control_rate},
      {"stance_height_m", c.stance_height},
      {"height_kp_n_per_m", c.height_kp},
      {"height_kd_ns_per_m", c.height_kd},
      {"raibert_gain_s", c.raibert_gain},
      {"velocity_ramp_time_s", c.velocity_ramp_time},
      {"sway_kp_n_per_m", c.sway_kp},
      {"sway_kd_ns_per_m", c.sway_kd},
      {"load_ramp_fraction", c.load_ramp},
      {"load_lead_fraction", c.load_lead},
      {"touchdown_preload_n", c.touchdown_preload},
      {"sway_filter_tau_s", c.sway_filter_tau},
      {"yaw_kp_nm_per_rad", c.yaw_kp},
      {"touchdown_depth_m", c.touchdown_depth},
      {"swing_kp_nm_per_rad", {c.swing_gains.kp[0], c.swing_gains.kp[1], c.swing_gains.kp[2]}},
      {"swing_kd_nms_per_rad", {c.swing_gains.kd[0], c.swing_gains.kd[1], c.swing_gains.kd[2]}},
      {"contact",
       {{"torque_threshold_nm", c.contact.torque_threshold},
        {"low_pass_cutoff_hz", c.contact.low_pass_cutoff},
        {"hysteresis_nm", c.contact.hysteresis}}}};
}

Vec3 vec3_or(const json& j, const char* key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw ConfigError(std::string(key) + ": expected an array of 3 numbers");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

ControllerParams controller_from_json(const json& j, ControllerParams c) {
  c.control_rate = get_or(j, "control_rate_hz", c.control_rate);
  c.stance_height = get_or(j, "stance_height_m", c.stance_height);
  c.height_kp = get_or(j, "height_kp_n_per_m", c.height_kp);
  c.height_kd = get_or(j, "height_kd_ns_per_m", c.height_kd);
  c.raibert_gain = get_or(j, "raibert_gain_s", c.raibert_gain);
  c.velocity_ramp_time = get_or(j, "velocity_ramp_time_s", c.velocity_ramp_time);
  c.sway_kp = get_or(j, "sway_kp_n_per_m", c.sway_kp);
  c.sway_kd = get_or(j, "sway_kd_ns_per_m", c.sway_kd);
  c.load_ramp = get_or(j, "load_ramp_fraction", c.load_ramp);
  c.load_lead = get_or(j, "load_lead_fraction", c.load_lead);
  c.touchdown_preload = get_or(j, "touchdown_preload_n", c.touchdown_preload);
  c.sway_filter_tau = get_or(j, "sway_filter_tau_s", c.sway_filter_tau);
  c.yaw_kp = get_or(j, "yaw_kp_nm_per_rad", c.yaw_kp);
  c.touchdown_depth = get_or(j, "touchdown_depth_m", c.touchdown_depth);
  c.swing_gains.kp = vec3_or(j, "swing_kp_nm_per_rad", c.swing_gains.kp);
  c.swing_gains.kd = vec3_or(j, "swing_kd_nms_per_rad", c.swing_gains.kd);
  if (j.contains("contact")) {
    const json& ct = j.at("contact");
    c.contact.torque_threshold =
        get_or(ct, "torque_threshold_nm", c.contact.torque_threshold);
    c.contact.low_pass_cutoff =
        get_or(ct, "low_pass_cutoff_hz", c.contact.low_pass_cutoff);
    c.contact.hysteresis = get_or(ct, "hysteresis_nm", c.contact.hysteresis);
  }
  return c;
}

json bus_to_json(const BusTopology& b) {
  return json{{"_note", "bitrate and overhead are stated assumptions"},
              {"bitrate_bps", b.bitrate},
              {"overhead_bits", b.overhead_bits},
              {"wire_rating_a", b.wire_rating_a}};
}

BusTopology bus_from_json(const json& j, BusTopology b) {
  b.bitrate = get_or(j, "bitrate_bps", b.bitrate);
  b.overhead_bits = get_or(j, "overhead_bits", b.overhead_bits);
  b.wire_rating_a = get_or(j, "wire_rating_a", b.wire_rating_a);
  return b;
}

json gait_to_json(const GaitSchedule& g) {
  return json{{"period_s", g.period},
              {"duty_factor", g.duty_factor},
              {"swing_height_m", g.swing_height}};
}

GaitSchedule gait_from_json(const json& j, GaitSchedule g) {
  g.period = get_or(j, "period_s", g.period);
  g.duty_factor = get_or(j, "duty_factor", g.duty_factor);
  g.swing_height = get_or(j, "swing_height_m", g.swing_height);
  return g;
}

}  // namespace

SystemConfig load_system_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  SystemConfig c;
  if (j.contains("robot")) c.robot = robot_from_json(j.at("robot"), c.robot);
  if (j.contains("motor")) c.motor = motor_from_json(j.at("motor"), c.motor);
  if (j.contains("thermal")) {
    const json& t = j.at("thermal");
    if (t.contains("with_sink"))
      c.thermal_with_sink = thermal_from_json(t.at("with_sink"), c.thermal_with_sink);
    if (t.contains("without_sink"))
      c.thermal_without_sink =
          thermal_from_json(t.at("without_sink"), c.thermal_without_sink);
    c.use_heatsink = get_or(t, "use_heatsink", c.use_heatsink);
  }
  if (j.contains("terrain")) c.terrain = terrain_from_json(j.at("terrain"), c.terrain);
  if (j.contains("sim")) c.sim = sim_from_json(j.at("sim"), c.sim);
  if (j.contains("controller"))
    c.controller = controller_from_json(j.at("controller"), c.controller);
  if (j.contains("bus")) c.bus = bus_from_json(j.at("bus"), c.bus);
  if (j.contains("gaits")) {
    const json& g = j.at("gaits");
    if (g.contains("trot")) c.trot = gait_from_json(g.at("trot"), c.trot);
    if (g.contains("crawl")) c.crawl = gait_from_json(g.at("crawl"), c.crawl);
  }
  c.trace_every_n = get_or(j, "trace_every_n", c.trace_every_n);

  c.sync_derived();
  c.validate();
  return c;
}

void save_system_config(const SystemConfig& config, const std::string& path) {
  json j;
  j["robot"] = robot_to_json(config.robot);
  j["motor"] = motor_to_json(config.motor);
  j["thermal"] = json{{"_note", "RC values calibrated to the 3x endurance ratio"},
                      {"with_sink", thermal_to_json(config.thermal_with_sink)},
                      {"without_sink", thermal_to_json(config.thermal_without_sink)},
                      {"use_heatsink", config.use_heatsink}};
  j["terrain"] = terrain_to_json(config.terrain);
  j["sim"] = sim_to_json(config.sim);
  j["controller"] = controller_to_json(config.controller);
  j["bus"] = bus_to_json(config.bus);
  j["gaits"] = json{{"trot", gait_to_json(config.trot)},
                    {"crawl", gait_to_json(config.crawl)}};
  j["trace_every_n"] = config.trace_every_n;

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace quadsim
