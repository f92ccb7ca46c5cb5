#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "quadsim/config.hpp"

namespace quadsim {

enum class Scenario { Stand, Trot, Crawl };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct ExperimentSpec {
  Scenario scenario = Scenario::Stand;
  double duration = 5.0;  // s
  double speed = 0.0;     // m/s along the uphill direction
  double slope_deg = 0.0;
  uint64_t seed = 0;
  std::string config_path;  // empty: built-in defaults
  std::string policy_path;  // empty: built-in stabilizer
  std::string output_dir;   // empty: no files written
  bool transport_delay = false;  // one-tick command transport delay
  double gait_period = 0.0;      // s; 0 = use the configured schedule
  double gait_duty = 0.0;        // stance fraction; 0 = use configured

  void validate() const;
};

struct MetricsSummary {
  double mean_forward_speed = 0.0;  // m/s along the slope direction
  double height_rms_error = 0.0;    // m, base height above terrain vs nominal
  double roll_pitch_rms = 0.0;      // rad, terrain-relative
  bool fell = false;
  double max_driver_temp = 0.0;   // degC
  double energy_consumed = 0.0;   // J electrical, no regeneration
  double contact_detection_latency_p95 = 0.0;  // s, detected footfalls
  double contact_detection_hit_rate = 1.0;     // detected within 20 ms
  double contact_false_positive_rate = 0.0;    // swing ticks asserting contact
  int footfall_count = 0;
  double bus_utilization_max = 0.0;
  int unreachable_target_warnings = 0;
  // rad, worst logged excursion past a joint limit over the whole run
  double max_joint_limit_violation = 0.0;
};

// deterministic for a fixed spec; writes trace.csv, summary.json and
// summary.schema.json into output_dir when set
MetricsSummary run_experiment(const ExperimentSpec& spec);

std::string summary_to_json_string(const MetricsSummary& metrics,
                                   const ExperimentSpec& spec);

// the schema shipped in docs/summary.schema.json
std::string builtin_summary_schema();

// minimal validator: checks required fields and primitive types against a
// draft-07-style schema (subset: type, properties, required)
bool summary_json_matches_schema(const std::string& summary_json,
                                 const std::string& schema_json,
                                 std::string* why = nullptr);

struct ThermalBenchResult {
  bool tripped = false;
  double time_to_trip = std::numeric_limits<double>::infinity();  // s
  double final_driver_temp = 0.0;
  double final_sink_temp = 0.0;
  // decimated (time, driver temp, sink temp) rows
  std::vector<std::array<double, 3>> trace;
};

ThermalBenchResult thermal_bench(bool heatsink, double power,
                                 const SystemConfig& config, double dt = 0.01,
                                 double max_time = 7200.0);

// static SVG (height, attitude, forward speed, contact raster) from a trace
void plot_trace(const std::string& csv_path, const std::string& svg_path);

}  // namespace quadsim
