#include "quadsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "quadsim/canbus.hpp"
#include "quadsim/control.hpp"
#include "quadsim/gait.hpp"

namespace quadsim {

using nlohmann::json;

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Stand: return "stand";
    case Scenario::Trot: return "trot";
    case Scenario::Crawl: return "crawl";
  }
  return "??";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "stand") return Scenario::Stand;
  if (name == "trot") return Scenario::Trot;
  if (name == "crawl") return Scenario::Crawl;
  throw ConfigError("unknown scenario: " + name +
                    " (expected stand, trot or crawl)");
}

void ExperimentSpec::validate() const {
  if (!(duration > 0.0)) throw ConfigError("duration_s must be > 0");
  if (std::abs(slope_deg) > 30.0)
    throw ConfigError("slope_deg must be within +/-30");
  if (!std::isfinite(speed)) throw ConfigError("speed must be finite");
}

namespace {

struct SlopeFrame {
  Vec3 uphill = Vec3::UnitX();  // unit vector along the slope surface
  Vec3 normal = Vec3::UnitZ();
};

SlopeFrame slope_frame(const Terrain& terrain) {
  SlopeFrame f;
  if (terrain.kind == TerrainKind::Incline) {
    f.uphill = Vec3(std::cos(terrain.slope_angle), 0.0,
                    std::sin(terrain.slope_angle));
    f.normal = terrain.plane().normal;
  }
  return f;
}

// terrain-relative roll/pitch, matching the controller's observation
std::pair<double, double> roll_pitch(const SimState& state,
                                     const Terrain& terrain) {
  const Mat3 r_slope =
      Eigen::AngleAxisd(terrain.kind == TerrainKind::Incline
                            ? -terrain.slope_angle
                            : 0.0,
                        Vec3::UnitY())
          .toRotationMatrix();
  const Mat3 rel =
      r_slope.transpose() * state.base_orientation.toRotationMatrix();
  const double pitch = -std::asin(std::clamp(rel(2, 0), -1.0, 1.0));
  const double roll = std::atan2(rel(2, 1), rel(2, 2));
  return {roll, pitch};
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double idx = p * (static_cast<double>(v.size()) - 1.0);
  const size_t lo = static_cast<size_t>(std::floor(idx));
  const size_t hi = static_cast<size_t>(std::ceil(idx));
  const double frac = idx - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

struct ContactTracker {
  std::array<bool, kNumLegs> prev_truth = {true, true, true, true};
  std::array<double, kNumLegs> last_rise = {-1.0, -1.0, -1.0, -1.0};
  std::vector<std::pair<double, int>> footfalls;  // (time, leg)

  void observe(const SimState& state) {
    for (int li = 0; li < kNumLegs; ++li) {
      if (state.in_contact[li] && !prev_truth[li]) {
        // debounce touchdown chatter
        if (last_rise[li] < 0.0 || state.time - last_rise[li] > 0.03)
          footfalls.emplace_back(state.time, li);
        last_rise[li] = state.time;
      }
      prev_truth[li] = state.in_contact[li];
    }
  }
};

}  // namespace

MetricsSummary run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  SystemConfig config = spec.config_path.empty()
                            ? default_system_config()
                            : load_system_config(spec.config_path);

  Terrain terrain = config.terrain;
  if (spec.slope_deg != 0.0) {
    terrain.kind = TerrainKind::Incline;
    terrain.slope_angle = deg2rad(spec.slope_deg);
  }
  terrain.validate();

  GaitSchedule schedule = GaitSchedule::stand();
  switch (spec.scenario) {
    case Scenario::Stand: schedule = GaitSchedule::stand(); break;
    case Scenario::Trot: schedule = config.trot; break;
    case Scenario::Crawl: schedule = config.crawl; break;
  }
  if (spec.gait_period > 0.0) schedule.period = spec.gait_period;
  if (spec.gait_duty > 0.0) schedule.duty_factor = spec.gait_duty;
  schedule.validate();

  const SlopeFrame frame = slope_frame(terrain);
  const Vec3 velocity_cmd = spec.scenario == Scenario::Stand
                                ? Vec3(Vec3::Zero())
                                : Vec3(frame.uphill * spec.speed);

  PolicyParams policy = spec.policy_path.empty()
                            ? stabilizer_policy(config.robot)
                            : load_policy(spec.policy_path);

  SimState state = initial_standing_state(
      config.robot, terrain, config.controller.stance_height, config.sim);
  Controller controller(config.robot, terrain, schedule, policy,
                        config.controller, velocity_cmd);

  std::unique_ptr<TraceWriter> trace;
  if (!spec.output_dir.empty()) {
    std::filesystem::create_directories(spec.output_dir);
    trace = std::make_unique<TraceWriter>(
        (std::filesystem::path(spec.output_dir) / "trace.csv").string(),
        config.trace_every_n);
  }

  const double dt = config.sim.dt;
  const double control_period = controller.control_period();
  const long steps = std::lround(spec.duration / dt);
  const auto reductions = leg_reductions(config.robot);
  const double kt = torque_constant(config.motor.kv);

  MetricsSummary metrics;
  metrics.contact_detection_hit_rate = 1.0;

  ContactTracker tracker;
  // control-tick history of the estimator, for latency matching
  std::vector<std::pair<double, std::array<bool, kNumLegs>>> estimate_log;
  long swing_ticks = 0, swing_false_positives = 0;

  std::array<double, kNumJoints> applied_cmds{};
  std::array<double, kNumJoints> pending_cmds{};
  bool have_pending = false;

  double next_control_time = 0.0;
  double height_sq_sum = 0.0, attitude_sq_sum = 0.0;
  long samples = 0;
  const Vec3 start_position = state.base_position;

  const auto truth_swing = [&](double t) {
    // scheduled swing per leg at time t
    return leg_phase(t, schedule);
  };

  try {
    for (long i = 0; i < steps; ++i) {
      if (state.time + 1e-9 >= next_control_time) {
        const auto cmds = controller.tick(state);
        next_control_time += control_period;

        // wire accounting: three commands and three telemetry frames per leg
        // bus every control tick
        std::vector<CanFrame> frames;
        frames.reserve(kNumLegs * 2 * kJointsPerLeg);
        std::array<double, kNumJoints> decoded{};
        for (int li = 0; li < kNumLegs; ++li) {
          for (int jj = 0; jj < kJointsPerLeg; ++jj) {
            const int idx = li * kJointsPerLeg + jj;
            const double eff =
                config.robot.transmission(static_cast<JointId>(jj)).efficiency;
            ActuatorCommandMsg cmd;
            cmd.feedforward_torque =
                static_cast<float>(cmds[idx] / (reductions[jj] * eff));
            CanFrame f;
            f.bus = li;
            f.arbitration_id = command_frame_id(jj + 1);
            f.payload = encode_command(cmd);
            f.timestamp = state.time;
            frames.push_back(f);
            decoded[idx] = static_cast<double>(
                               decode_command(f.payload).feedforward_torque) *
                           reductions[jj] * eff;

            const ActuatorState& act = state.actuators[idx];
            TelemetryMsg tel;
            tel.position = static_cast<float>(act.rotor_angle);
            tel.velocity = static_cast<float>(act.rotor_velocity);
            tel.torque_estimate = static_cast<float>(kt * act.current);
            tel.driver_temp = static_cast<float>(act.driver_temp);
            tel.fault_code = act.tripped ? 1 : 0;
            CanFrame tf;
            tf.bus = li;
            tf.arbitration_id = telemetry_frame_id(jj + 1);
            tf.payload = encode_telemetry(tel);
            tf.timestamp = state.time;
            frames.push_back(tf);
          }
        }
        const TransmitResult tx =
            bus_transmit(frames, config.bus, control_period);
        metrics.bus_utilization_max =
            std::max(metrics.bus_utilization_max, tx.max_utilization);

        if (spec.transport_delay) {
          applied_cmds = have_pending ? pending_cmds : decoded;
          pending_cmds = decoded;
          have_pending = true;
        } else {
          applied_cmds = cmds;
        }

        // estimator bookkeeping
        const auto& info = controller.last_tick_info();
        estimate_log.emplace_back(state.time, info.estimated_contact);
        const auto phases = truth_swing(state.time);
        for (int li = 0; li < kNumLegs; ++li) {
          if (!phases[li].stance && !state.in_contact[li]) {
            ++swing_ticks;
            if (info.estimated_contact[li]) ++swing_false_positives;
          }
        }
      }

      state = step(state, applied_cmds, terrain, config.robot, config.sim);
      tracker.observe(state);
      if (trace) trace->log(state);

      // metrics sampling
      const double height =
          terrain.plane().signed_distance(state.base_position);
      const double height_err = height - config.controller.stance_height;
      height_sq_sum += height_err * height_err;
      const auto [roll, pitch] = roll_pitch(state, terrain);
      attitude_sq_sum += roll * roll + pitch * pitch;
      ++samples;

      for (int li = 0; li < kNumLegs; ++li) {
        for (int jj = 0; jj < kJointsPerLeg; ++jj) {
          const double q = state.joints[li].q[jj];
          const double over =
              std::max(q - config.robot.joint_limits.upper[jj],
                       config.robot.joint_limits.lower[jj] - q);
          metrics.max_joint_limit_violation =
              std::max(metrics.max_joint_limit_violation, over);
        }
      }

      for (const ActuatorState& act : state.actuators) {
        metrics.max_driver_temp =
            std::max(metrics.max_driver_temp, act.driver_temp);
        const double electrical =
            electrical_power(act.current, config.motor, act.rotor_velocity,
                             kt * act.current);
        const double mechanical = kt * act.current * act.rotor_velocity;
        metrics.energy_consumed += std::max(0.0, electrical + mechanical) * dt;
      }

      if (height < 0.5 * config.controller.stance_height ||
          std::abs(roll) > deg2rad(30.0) || std::abs(pitch) > deg2rad(30.0)) {
        metrics.fell = true;
        break;  // no point simulating the aftermath
      }
    }
  } catch (const SimulationFault& fault) {
    if (!spec.output_dir.empty()) {
      std::ofstream snap(std::filesystem::path(spec.output_dir) /
                         "fault_snapshot.txt");
      snap << fault.what() << "\n" << fault.snapshot();
    }
    throw;
  }

  const double elapsed = state.time > 0.0 ? state.time : dt;
  metrics.mean_forward_speed =
      (state.base_position - start_position).dot(frame.uphill) / elapsed;
  metrics.height_rms_error =
      samples > 0 ? std::sqrt(height_sq_sum / static_cast<double>(samples)) : 0.0;
  metrics.roll_pitch_rms =
      samples > 0 ? std::sqrt(attitude_sq_sum / static_cast<double>(samples)) : 0.0;
  metrics.unreachable_target_warnings = controller.unreachable_target_count();

  // match ground-truth footfalls against estimator assertions
  std::vector<double> latencies;
  int detected_within_20ms = 0, considered = 0;
  for (const auto& [t0, leg] : tracker.footfalls) {
    if (t0 > spec.duration - 0.1) continue;  // no time left to detect
    ++considered;
    double detect_time = -1.0;
    for (const auto& [t, flags] : estimate_log) {
      if (t + 1e-9 < t0) continue;
      if (t - t0 > 0.1) break;
      if (flags[static_cast<size_t>(leg)]) {
        detect_time = t;
        break;
      }
    }
    if (detect_time >= 0.0) {
      const double latency = detect_time - t0;
      latencies.push_back(latency);
      if (latency <= 0.02) ++detected_within_20ms;
    }
  }
  metrics.footfall_count = considered;
  metrics.contact_detection_hit_rate =
      considered > 0
          ? static_cast<double>(detected_within_20ms) / considered
          : 1.0;
  metrics.contact_detection_latency_p95 = percentile(latencies, 0.95);
  metrics.contact_false_positive_rate =
      swing_ticks > 0
          ? static_cast<double>(swing_false_positives) /
                static_cast<double>(swing_ticks)
          : 0.0;

  if (!spec.output_dir.empty()) {
    const auto dir = std::filesystem::path(spec.output_dir);
    std::ofstream summary(dir / "summary.json");
    summary << summary_to_json_string(metrics, spec);
    std::ofstream schema(dir / "summary.schema.json");
    schema << builtin_summary_schema();
  }
  return metrics;
}

std::string summary_to_json_string(const MetricsSummary& m,
                                   const ExperimentSpec& spec) {
  json j;
  j["schema_version"] = 1;
  j["scenario"] = to_string(spec.scenario);
  j["duration_s"] = spec.duration;
  j["commanded_speed_mps"] = spec.speed;
  j["slope_deg"] = spec.slope_deg;
  j["seed"] = spec.seed;
  j["mean_forward_speed_mps"] = m.mean_forward_speed;
  j["height_rms_error_m"] = m.height_rms_error;
  j["roll_pitch_rms_rad"] = m.roll_pitch_rms;
  j["fell"] = m.fell;
  j["max_driver_temp_c"] = m.max_driver_temp;
  j["energy_consumed_j"] = m.energy_consumed;
  j["contact_detection_latency_p95_s"] = m.contact_detection_latency_p95;
  j["contact_detection_hit_rate"] = m.contact_detection_hit_rate;
  j["contact_false_positive_rate"] = m.contact_false_positive_rate;
  j["footfall_count"] = m.footfall_count;
  j["bus_utilization_max"] = m.bus_utilization_max;
  j["unreachable_target_warnings"] = m.unreachable_target_warnings;
  j["max_joint_limit_violation_rad"] = m.max_joint_limit_violation;
  return j.dump(2) + "\n";
}

std::string builtin_summary_schema() {
  // kept in sync with docs/summary.schema.json (checked by tests)
  return R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "run summary",
  "type": "object",
  "required": [
    "schema_version",
    "scenario",
    "duration_s",
    "commanded_speed_mps",
    "slope_deg",
    "seed",
    "mean_forward_speed_mps",
    "height_rms_error_m",
    "roll_pitch_rms_rad",
    "fell",
    "max_driver_temp_c",
    "energy_consumed_j",
    "contact_detection_latency_p95_s",
    "contact_detection_hit_rate",
    "contact_false_positive_rate",
    "footfall_count",
    "bus_utilization_max",
    "unreachable_target_warnings",
    "max_joint_limit_violation_rad"
  ],
  "properties": {
    "schema_version": {"type": "integer"},
    "scenario": {"type": "string"},
    "duration_s": {"type": "number"},
    "commanded_speed_mps": {"type": "number"},
    "slope_deg": {"type": "number"},
    "seed": {"type": "integer"},
    "mean_forward_speed_mps": {"type": "number"},
    "height_rms_error_m": {"type": "number"},
    "roll_pitch_rms_rad": {"type": "number"},
    "fell": {"type": "boolean"},
    "max_driver_temp_c": {"type": "number"},
    "energy_consumed_j": {"type": "number"},
    "contact_detection_latency_p95_s": {"type": "number"},
    "contact_detection_hit_rate": {"type": "number"},
    "contact_false_positive_rate": {"type": "number"},
    "footfall_count": {"type": "integer"},
    "bus_utilization_max": {"type": "number"},
    "unreachable_target_warnings": {"type": "integer"},
    "max_joint_limit_violation_rad": {"type": "number"}
  }
}
)";
}

bool summary_json_matches_schema(const std::string& summary_json,
                                 const std::string& schema_json,
                                 std::string* why) {
  json summary, schema;
  try {
    summary = json::parse(summary_json);
    schema = json::parse(schema_json);
  } catch (const json::exception& e) {
    if (why) *why = e.what();
    return false;
  }
  if (!summary.is_object()) {
    if (why) *why = "summary is not an object";
    return false;
  }
  for (const auto& req : schema.value("required", json::array())) {
    if (!summary.contains(req.get<std::string>())) {
      if (why) *why = "missing required field: " + req.get<std::string>();
      return false;
    }
  }
  const json props = schema.value("properties", json::object());
  for (const auto& [key, descr] : props.items()) {
    if (!summary.contains(key)) continue;
    const std::string type = descr.value("type", "");
    const json& v = summary.at(key);
    const bool ok = (type == "number" && v.is_number()) ||
                    (type == "integer" && v.is_number_integer()) ||
                    (type == "string" && v.is_string()) ||
                    (type == "boolean" && v.is_boolean()) || type.empty();
    if (!ok) {
      if (why) *why = "field " + key + " is not a " + type;
      return false;
    }
  }
  return true;
}

ThermalBenchResult thermal_bench(bool heatsink, double power,
                                 const SystemConfig& config, double dt,
                                 double max_time) {
  if (!(power > 0.0)) throw ConfigError("thermal bench power must be > 0");
  if (!(dt > 0.0)) throw ConfigError("thermal bench dt must be > 0");
  const ThermalParams params =
      heatsink ? config.thermal_with_sink : config.thermal_without_sink;
  params.validate();

  ActuatorState state;
  state.driver_temp = params.ambient;
  state.sink_temp = params.ambient;

  ThermalBenchResult result;
  const long steps = std::lround(max_time / dt);
  const long trace_stride = std::max(1L, steps / 2000);
  double t = 0.0;
  for (long i = 0; i < steps; ++i) {
    if (i % trace_stride == 0)
      result.trace.push_back({t, state.driver_temp, state.sink_temp});
    state = thermal_step(power, state, params, dt);
    t += dt;
    if (state.tripped) {
      result.tripped = true;
      result.time_to_trip = t;
      break;
    }
  }
  result.trace.push_back({t, state.driver_temp, state.sink_temp});
  result.final_driver_temp = state.driver_temp;
  result.final_sink_temp = state.sink_temp;
  return result;
}

}  // namespace quadsim
