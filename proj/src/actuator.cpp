#include "quadsim/actuator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadsim {

void MotorParams::validate() const {
  if (!(kv > 0.0)) throw ModelValidationError("motor.kv must be > 0");
  if (!(phase_resistance > 0.0))
    throw ModelValidationError("motor.phase_resistance_ohm must be > 0");
  if (!(current_limit > 0.0))
    throw ModelValidationError("motor.current_limit_a must be > 0");
  if (!(bus_voltage > 0.0))
    throw ModelValidationError("motor.bus_voltage_v must be > 0");
  if (!(rotor_inertia > 0.0))
    throw ModelValidationError("motor.rotor_inertia_kgm2 must be > 0");
}

void ThermalParams::validate() const {
  if (!(driver_capacitance > 0.0))
    throw ModelValidationError("thermal.driver_capacitance_j_per_k must be > 0");
  if (!(sink_capacitance > 0.0))
    throw ModelValidationError("thermal.sink_capacitance_j_per_k must be > 0");
  if (!(driver_to_sink_resistance > 0.0))
    throw ModelValidationError(
        "thermal.driver_to_sink_resistance_k_per_w must be > 0");
  if (!(sink_to_ambient_resistance > 0.0))
    throw ModelValidationError(
        "thermal.sink_to_ambient_resistance_k_per_w must be > 0");
  if (!(trip_temperature > ambient))
    throw ModelValidationError("thermal.trip_temperature_c must exceed ambient");
}

double torque_constant(double kv) {
  if (!(kv > 0.0)) throw ModelValidationError("kv must be > 0");
  return 60.0 / (2.0 * kPi * kv);
}

double envelope_current(double rotor_velocity, const MotorParams& params) {
  const double kt = torque_constant(params.kv);
  const double headroom =
      (params.bus_voltage - kt * std::abs(rotor_velocity)) /
      params.phase_resistance;
  return std::min(params.current_limit, std::max(0.0, headroom));
}

TorqueCommandResult apply_torque_command(double cmd_torque,
                                         const ActuatorState& state,
                                         const MotorParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("apply_torque_command: dt must be > 0");
  TorqueCommandResult out;
  out.state = state;
  if (state.tripped) {
    out.state.current = 0.0;
    out.achieved_torque = 0.0;
    return out;
  }
  const double kt = torque_constant(params.kv);
  const double i_max = envelope_current(state.rotor_velocity, params);
  const double i = std::clamp(cmd_torque / kt, -i_max, i_max);
  out.state.current = i;
  out.achieved_torque = kt * i;
  return out;
}

double joint_torque_capacity(JointId joint, const RobotModel& model,
                             const MotorParams& params, double joint_velocity) {
  const TransmissionSpec& spec = model.transmission(joint);
  const double reduction = joint_reduction(joint, spec);
  const double kt = torque_constant(params.kv);
  const double rotor_velocity = reduction * joint_velocity;
  return kt * envelope_current(rotor_velocity, params) * reduction *
         spec.efficiency;
}

ActuatorState thermal_step(double power_dissipated, const ActuatorState& state,
                           const ThermalParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("thermal_step: dt must be > 0");
  if (power_dissipated < 0.0)
    throw std::invalid_argument("thermal_step: power must be >= 0");
  ActuatorState next = state;
  const double q_ds =
      (state.driver_temp - state.sink_temp) / params.driver_to_sink_resistance;
  const double q_sa =
      (state.sink_temp - params.ambient) / params.sink_to_ambient_resistance;
  next.driver_temp += dt * (power_dissipated - q_ds) / params.driver_capacitance;
  next.sink_temp += dt * (q_ds - q_sa) / params.sink_capacitance;
  if (next.driver_temp >= params.trip_temperature) next.tripped = true;
  return next;
}

ActuatorState reset_trip(const ActuatorState& state) {
  ActuatorState next = state;
  next.tripped = false;
  return next;
}

double reflected_inertia(double rotor_inertia, double reduction) {
  if (!(rotor_inertia > 0.0) || !(reduction > 0.0))
    throw ModelValidationError("reflected_inertia: inputs must be > 0");
  return reduction * reduction * rotor_inertia;
}

double electrical_power(double current, const MotorParams& params,
                        double /*rotor_velocity*/, double /*torque*/) {
  return current * current * params.phase_resistance;
}

// placeholder RC values calibrated so a steady 12 W dissipation trips the
// bare driver near 600 s and the heat-sink build near 1800 s (3x ratio);
// values frozen by tests/thermal_calibration
ThermalParams thermal_params_without_sink() {
  ThermalParams p;
  p.driver_capacitance = 20.0;
  p.sink_capacitance = 46.0;
  p.driver_to_sink_resistance = 0.42;
  p.sink_to_ambient_resistance = 5.10;
  return p;
}

ThermalParams thermal_params_with_sink() {
  ThermalParams p;
  p.driver_capacitance = 20.0;
  p.sink_capacitance = 149.0;
  p.driver_to_sink_resistance = 0.42;
  p.sink_to_ambient_resistance = 4.70;
  return p;
}

}  // namespace quadsim
