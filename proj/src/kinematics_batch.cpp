#include "quadsim/kinematics_batch.hpp"

namespace quadsim {

BatchKinematics batch_leg_kinematics_serial(const std::vector<LegState>& states,
                                            const RobotModel& model) {
  BatchKinematics out;
  out.foot_positions.resize(states.size());
  out.jacobians.resize(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    out.foot_positions[i] = forward_kinematics(model, states[i].leg_id, states[i].q);
    out.jacobians[i] = jacobian(model, states[i].leg_id, states[i].q);
  }
  return out;
}

BatchKinematics batch_leg_kinematics_parallel(
    const std::vector<LegState>& states, const RobotModel& model) {
  BatchKinematics out;
  out.foot_positions.resize(states.size());
  out.jacobians.resize(states.size());
  const long n = static_cast<long>(states.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out.foot_positions[i] = forward_kinematics(model, states[i].leg_id, states[i].q);
    out.jacobians[i] = jacobian(model, states[i].leg_id, states[i].q);
  }
  return out;
}

BatchKinematics batch_leg_kinematics(const std::vector<LegState>& states,
                                     const RobotModel& model, bool parallel) {
  return parallel ? batch_leg_kinematics_parallel(states, model)
                  : batch_leg_kinematics_serial(states, model);
}

}  // namespace quadsim
