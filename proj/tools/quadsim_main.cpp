// quadsim: experiment runner and model inspection CLI.
//
// exit codes: 0 success (run: completed upright), 1 run completed but the
// robot fell, 2 bad arguments or config, 3 simulation fault (diagnostic
// snapshot written when --out is set).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "quadsim/actuator.hpp"
#include "quadsim/config.hpp"
#include "quadsim/experiment.hpp"
#include "quadsim/kinematics.hpp"
#include "quadsim/simworld.hpp"

namespace {

using namespace quadsim;

LegId leg_from_string(const std::string& name) {
  for (LegId leg : kLegOrder)
    if (name == to_string(leg)) return leg;
  throw CLI::ValidationError("--leg", "expected one of FL, FR, RL, RR");
}

int cmd_run(const ExperimentSpec& spec) {
  const MetricsSummary metrics = run_experiment(spec);
  std::cout << summary_to_json_string(metrics, spec);
  if (!spec.output_dir.empty())
    std::cerr << "wrote " << spec.output_dir << "/trace.csv and summary.json\n";
  return metrics.fell ? 1 : 0;
}

int cmd_thermal_bench(bool heatsink, double power, const std::string& config_path,
                      const std::string& out_csv) {
  const SystemConfig config = config_path.empty()
                                  ? default_system_config()
                                  : load_system_config(config_path);
  const ThermalBenchResult result = thermal_bench(heatsink, power, config);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_csv.empty()) {
    file.open(out_csv);
    if (!file) throw ConfigError("cannot write " + out_csv);
    out = &file;
  }
  *out << "time_s,driver_temp_c,sink_temp_c\n";
  for (const auto& row : result.trace)
    *out << row[0] << "," << row[1] << "," << row[2] << "\n";

  std::cerr << "heatsink " << (heatsink ? "on" : "off") << ", " << power
            << " W: ";
  if (result.tripped)
    std::cerr << "tripped at " << result.time_to_trip << " s\n";
  else
    std::cerr << "no trip within horizon (driver settles at "
              << result.final_driver_temp << " C)\n";
  return 0;
}

int cmd_describe_model(const std::string& config_path) {
  const SystemConfig config = config_path.empty()
                                  ? default_system_config()
                                  : load_system_config(config_path);
  const RobotModel& m = config.robot;
  const auto reductions = leg_reductions(m);

  std::printf("total mass        %.3f kg\n", m.total_mass);
  std::printf("torso dims        %.3f x %.3f x %.3f m\n", m.torso_dims.x(),
              m.torso_dims.y(), m.torso_dims.z());
  const Mat3 inertia = m.base_inertia();
  std::printf("base inertia diag %.4f %.4f %.4f kg m^2\n", inertia(0, 0),
              inertia(1, 1), inertia(2, 2));
  std::printf("link lengths      thigh %.3f m, shank %.3f m, abad offset %.3f m\n",
              m.thigh_length, m.shank_length, m.abad_offset);
  for (LegId leg : kLegOrder) {
    const Vec3& hip = m.hip_offset(leg);
    std::printf("hip offset %s     (%+.3f, %+.3f, %+.3f) m\n", to_string(leg),
                hip.x(), hip.y(), hip.z());
  }
  std::printf("\n%-6s %10s %16s %14s %18s\n", "joint", "reduction",
              "reflected inertia", "stall torque", "limits (deg)");
  for (int jj = 0; jj < kJointsPerLeg; ++jj) {
    const auto joint = static_cast<JointId>(jj);
    const double stall = joint_torque_capacity(joint, m, config.motor, 0.0);
    std::printf("%-6s %10.4f %13.4e kg m^2 %10.2f Nm   [%.1f, %.1f]\n",
                to_string(joint), reductions[jj],
                reflected_inertia(config.motor.rotor_inertia, reductions[jj]),
                stall, rad2deg(m.joint_limits.lower[jj]),
                rad2deg(m.joint_limits.upper[jj]));
  }
  return 0;
}

int cmd_fk(const std::string& leg_name, const std::vector<double>& q_deg,
           const std::string& config_path) {
  const SystemConfig config = config_path.empty()
                                  ? default_system_config()
                                  : load_system_config(config_path);
  const LegId leg = leg_from_string(leg_name);
  const Vec3 q(deg2rad(q_deg[0]), deg2rad(q_deg[1]), deg2rad(q_deg[2]));
  const Vec3 p = forward_kinematics(config.robot, leg, q);
  std::printf("foot (torso frame): %+.6f %+.6f %+.6f m\n", p.x(), p.y(), p.z());
  const Mat3 j = jacobian(config.robot, leg, q);
  std::printf("jacobian:\n");
  for (int r = 0; r < 3; ++r)
    std::printf("  %+.6f %+.6f %+.6f\n", j(r, 0), j(r, 1), j(r, 2));
  return 0;
}

int cmd_ik(const std::string& leg_name, const std::vector<double>& target,
           bool forward_branch, const std::string& config_path) {
  const SystemConfig config = config_path.empty()
                                  ? default_system_config()
                                  : load_system_config(config_path);
  const LegId leg = leg_from_string(leg_name);
  const Vec3 p(target[0], target[1], target[2]);
  const Vec3 q = inverse_kinematics(
      config.robot, leg, p,
      forward_branch ? KneeBranch::FlexedForward : KneeBranch::FlexedBack);
  std::printf("q (deg): abad %+.4f  hip %+.4f  knee %+.4f\n", rad2deg(q[0]),
              rad2deg(q[1]), rad2deg(q[2]));
  const Vec3 check = forward_kinematics(config.robot, leg, q);
  std::printf("fk check: %+.6f %+.6f %+.6f m\n", check.x(), check.y(),
              check.z());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadruped gait simulator"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string scenario_name = "stand";
  auto* run = app.add_subcommand("run", "simulate a scenario, emit metrics");
  run->add_option("--scenario", scenario_name, "stand, trot or crawl")
      ->required();
  run->add_option("--speed", spec.speed, "commanded speed, m/s");
  run->add_option("--slope-deg", spec.slope_deg, "terrain slope, degrees");
  run->add_option("--duration", spec.duration, "simulated time, s");
  run->add_option("--seed", spec.seed, "random seed (echoed into summary)");
  run->add_option("--config", spec.config_path, "system config JSON");
  run->add_option("--policy", spec.policy_path, "policy JSON");
  run->add_option("--out", spec.output_dir, "output directory for trace/summary");
  run->add_flag("--transport-delay", spec.transport_delay,
                "apply one-control-tick command transport delay");
  run->add_option("--period", spec.gait_period,
                  "gait period override, s (default: from config)");
  run->add_option("--duty", spec.gait_duty,
                  "stance duty factor override (default: from config)");

  std::string heatsink = "on";
  double bench_power = 12.0;
  std::string bench_config, bench_out;
  auto* bench =
      app.add_subcommand("thermal-bench", "driver heating to thermal trip");
  bench->add_option("--heatsink", heatsink, "on or off")
      ->required()
      ->check(CLI::IsMember({"on", "off"}));
  bench->add_option("--power", bench_power, "dissipated power, W")->required();
  bench->add_option("--config", bench_config, "system config JSON");
  bench->add_option("--out", bench_out, "CSV trace path (default: stdout)");

  std::string describe_config;
  auto* describe = app.add_subcommand(
      "describe-model", "print the model and derived transmission data");
  describe->add_option("--config", describe_config, "system config JSON");

  std::string fk_leg = "FL", fk_config;
  std::vector<double> fk_q;
  auto* fk = app.add_subcommand("fk", "foot position from joint angles");
  fk->add_option("--leg", fk_leg, "FL, FR, RL or RR");
  fk->add_option("--q", fk_q, "abad hip knee, degrees")
      ->expected(3)
      ->required();
  fk->add_option("--config", fk_config, "system config JSON");

  std::string ik_leg = "FL", ik_config;
  std::vector<double> ik_target;
  bool ik_forward = false;
  auto* ik = app.add_subcommand("ik", "joint angles from a foot target");
  ik->add_option("--leg", ik_leg, "FL, FR, RL or RR");
  ik->add_option("--target", ik_target, "x y z, torso frame, m")
      ->expected(3)
      ->required();
  ik->add_flag("--knee-forward", ik_forward, "use the forward knee branch");
  ik->add_option("--config", ik_config, "system config JSON");

  std::string plot_csv, plot_svg;
  auto* plot = app.add_subcommand("plot", "render a trace CSV to SVG");
  plot->add_option("csv", plot_csv, "trace.csv from a run")->required();
  plot->add_option("--out", plot_svg, "SVG path (default: alongside the CSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      spec.scenario = scenario_from_string(scenario_name);
      return cmd_run(spec);
    }
    if (bench->parsed())
      return cmd_thermal_bench(heatsink == "on", bench_power, bench_config,
                               bench_out);
    if (describe->parsed()) return cmd_describe_model(describe_config);
    if (fk->parsed()) return cmd_fk(fk_leg, fk_q, fk_config);
    if (ik->parsed()) return cmd_ik(ik_leg, ik_target, ik_forward, ik_config);
    if (plot->parsed()) {
      if (plot_svg.empty())
        plot_svg =
            std::filesystem::path(plot_csv).replace_extension(".svg").string();
      plot_trace(plot_csv, plot_svg);
      std::cerr << "wrote " << plot_svg << "\n";
      return 0;
    }
  } catch (const SimulationFault& e) {
    std::cerr << "simulation fault: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
