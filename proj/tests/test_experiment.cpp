#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "quadsim/experiment.hpp"

using namespace quadsim;

namespace {

std::filesystem::path temp_dir(const char* leaf) {
  const auto dir = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scenario names roundtrip") {
  CHECK(scenario_from_string("stand") == Scenario::Stand);
  CHECK(scenario_from_string("trot") == Scenario::Trot);
  CHECK(scenario_from_string("crawl") == Scenario::Crawl);
  CHECK(std::string(to_string(Scenario::Crawl)) == "crawl");
  CHECK_THROWS_AS(scenario_from_string("gallop"), ConfigError);
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.duration = 0.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.duration = 5.0;
  spec.slope_deg = 45.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.slope_deg = 0.0;
  spec.speed = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("summary JSON matches the shipped schema") {
  ExperimentSpec spec;
  spec.scenario = Scenario::Stand;
  spec.duration = 1.0;
  MetricsSummary m;
  m.mean_forward_speed = 0.01;
  m.footfall_count = 4;

  const std::string json = summary_to_json_string(m, spec);
  std::string why;
  CHECK(summary_json_matches_schema(json, builtin_summary_schema(), &why));
  CHECK(why.empty());

  SUBCASE("missing required field is rejected") {
    auto pos = json.find("\"fell\"");
    REQUIRE(pos != std::string::npos);
    std::string broken = json;
    broken.replace(pos, 6, "\"fill\"");
    CHECK_FALSE(
        summary_json_matches_schema(broken, builtin_summary_schema(), &why));
    CHECK(why.find("fell") != std::string::npos);
  }
  SUBCASE("wrong type is rejected") {
    auto pos = json.find("\"footfall_count\": 4");
    REQUIRE(pos != std::string::npos);
    std::string broken = json;
    broken.replace(pos, 19, "\"footfall_count\": \"4\"");
    CHECK_FALSE(
        summary_json_matches_schema(broken, builtin_summary_schema(), &why));
    CHECK(why.find("footfall_count") != std::string::npos);
  }
  SUBCASE("non-json input is rejected") {
    CHECK_FALSE(
        summary_json_matches_schema("{oops", builtin_summary_schema(), &why));
  }
}

TEST_CASE("thermal bench responds to power and heatsink choice") {
  SystemConfig config = default_system_config();

  auto base = thermal_bench(false, 12.0, config);
  REQUIRE(base.tripped);
  CHECK(base.time_to_trip > 0.0);
  REQUIRE_FALSE(base.trace.empty());
  CHECK(base.trace.front()[1] >= config.thermal_without_sink.ambient - 1e-9);
  CHECK(base.trace.front()[1] < 35.0);  // starts near ambient, not at trip
  CHECK(base.final_driver_temp >=
        config.thermal_without_sink.trip_temperature - 1e-6);

  // doubling the dissipated power strictly shortens the time to trip
  auto hot = thermal_bench(false, 24.0, config);
  REQUIRE(hot.tripped);
  CHECK(hot.time_to_trip < base.time_to_trip);

  // the heatsink buys extra time at the same power
  auto sunk = thermal_bench(true, 12.0, config);
  REQUIRE(sunk.tripped);
  CHECK(sunk.time_to_trip > base.time_to_trip);

  // tiny power never trips within the horizon
  auto cold = thermal_bench(true, 0.5, config, 0.01, 100.0);
  CHECK_FALSE(cold.tripped);
  CHECK(std::isinf(cold.time_to_trip));
  CHECK(cold.final_driver_temp <
        config.thermal_with_sink.trip_temperature);

  CHECK_THROWS_AS(thermal_bench(true, -1.0, config), ConfigError);
  CHECK_THROWS_AS(thermal_bench(true, 12.0, config, 0.0), ConfigError);
}

TEST_CASE("short standing run produces files and a sane summary") {
  const auto dir = temp_dir("quadsim_exp_stand");
  ExperimentSpec spec;
  spec.scenario = Scenario::Stand;
  spec.duration = 1.0;
  spec.output_dir = dir.string();

  MetricsSummary m = run_experiment(spec);
  CHECK_FALSE(m.fell);
  CHECK(std::abs(m.mean_forward_speed) < 0.05);
  CHECK(m.height_rms_error < 0.05);
  CHECK(m.roll_pitch_rms < 0.1);
  CHECK(m.max_joint_limit_violation <= 1e-9);
  CHECK(m.bus_utilization_max > 0.0);
  CHECK(m.bus_utilization_max < 0.15);
  CHECK(m.unreachable_target_warnings == 0);

  CHECK(std::filesystem::exists(dir / "trace.csv"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "summary.schema.json"));

  const std::string summary = read_text(dir / "summary.json");
  const std::string schema = read_text(dir / "summary.schema.json");
  std::string why;
  CHECK(summary_json_matches_schema(summary, schema, &why));
  CHECK(schema == builtin_summary_schema());

  SUBCASE("trace renders to SVG") {
    const auto svg = dir / "trace.svg";
    plot_trace((dir / "trace.csv").string(), svg.string());
    const std::string text = read_text(svg);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("</svg>") != std::string::npos);
  }
  SUBCASE("plot rejects inputs without the expected columns") {
    const auto bogus = dir / "bogus.csv";
    std::ofstream(bogus) << "a,b,c\n1,2,3\n4,5,6\n";
    CHECK_THROWS_AS(plot_trace(bogus.string(), (dir / "x.svg").string()),
                    ConfigError);
  }
}

TEST_CASE("identical specs give byte-identical summaries") {
  ExperimentSpec spec;
  spec.scenario = Scenario::Stand;
  spec.duration = 0.5;
  spec.seed = 7;
  auto a = summary_to_json_string(run_experiment(spec), spec);
  auto b = summary_to_json_string(run_experiment(spec), spec);
  CHECK(a == b);
}
