#pragma once

#include <string>

#include "quadsim/actuator.hpp"
#include "quadsim/canbus.hpp"
#include "quadsim/control.hpp"
#include "quadsim/gait.hpp"
#include "quadsim/morphology.hpp"
#include "quadsim/simworld.hpp"

namespace quadsim {

// everything tunable in one place; a config file overrides individual fields,
// absent keys keep these defaults
struct SystemConfig {
  RobotModel robot;
  MotorParams motor;
  ThermalParams thermal_with_sink = thermal_params_with_sink();
  ThermalParams thermal_without_sink = thermal_params_without_sink();
  bool use_heatsink = true;
  Terrain terrain;  // contact parameters; kind and slope come from the run
  SimParams sim;
  ControllerParams controller;
  BusTopology bus;
  GaitSchedule trot = GaitSchedule::trot();
  GaitSchedule crawl = GaitSchedule::crawl();
  int trace_every_n = 10;

  void validate() const;
  // propagates motor/thermal selections into sim and controller params
  void sync_derived() ;
};

SystemConfig default_system_config();
SystemConfig load_system_config(const std::string& path);
void save_system_config(const SystemConfig& config, const std::string& path);

}  // namespace quadsim
