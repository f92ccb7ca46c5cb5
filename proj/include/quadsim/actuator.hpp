#pragma once

#include "quadsim/morphology.hpp"
#include "quadsim/types.hpp"

namespace quadsim {

struct MotorParams {
  double kv = 100.0;               // rpm/V
  double phase_resistance = 0.12;  // ohm, winding + driver lumped
  double current_limit = 40.0;     // A
  double bus_voltage = 22.2;       // V
  double rotor_inertia = 1.2e-4;   // kg m^2

  void validate() const;
};

struct ThermalParams {
  double driver_capacitance = 20.0;        // J/K
  double sink_capacitance = 60.0;          // J/K
  double driver_to_sink_resistance = 0.4;  // K/W
  double sink_to_ambient_resistance = 4.0; // K/W
  double ambient = 25.0;                   // degC
  double trip_temperature = 80.0;          // degC

  void validate() const;
};

struct ActuatorState {
  double rotor_angle = 0.0;     // rad
  double rotor_velocity = 0.0;  // rad/s
  double current = 0.0;         // A
  double driver_temp = 25.0;    // degC
  double sink_temp = 25.0;      // degC
  bool tripped = false;
};

double torque_constant(double kv);  // Nm/A = 60 / (2 pi kv)

// current available at rotor speed omega: min(limit, back-EMF headroom)
double envelope_current(double rotor_velocity, const MotorParams& params);

struct TorqueCommandResult {
  double achieved_torque = 0.0;  // Nm, rotor side
  ActuatorState state;
};

// quasi-static electrical model: i = cmd/Kt clamped to the current limit and
// the back-EMF envelope; a tripped driver produces no torque
TorqueCommandResult apply_torque_command(double cmd_torque,
                                         const ActuatorState& state,
                                         const MotorParams& params, double dt);

// max joint-side torque at a given joint velocity, through the reduction
double joint_torque_capacity(JointId joint, const RobotModel& model,
                             const MotorParams& params, double joint_velocity);

// explicit-Euler update of the two-node driver/sink RC network; latches
// tripped once driver_temp reaches trip_temperature
ActuatorState thermal_step(double power_dissipated, const ActuatorState& state,
                           const ThermalParams& params, double dt);

ActuatorState reset_trip(const ActuatorState& state);

double reflected_inertia(double rotor_inertia, double reduction);

double electrical_power(double current, const MotorParams& params,
                        double rotor_velocity, double torque);

// calibrated driver thermal configurations: bolted heat sink vs bare driver
ThermalParams thermal_params_with_sink();
ThermalParams thermal_params_without_sink();

}  // namespace quadsim
