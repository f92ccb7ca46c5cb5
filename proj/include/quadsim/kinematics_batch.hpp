#pragma once

#include <vector>

#include "quadsim/kinematics.hpp"
#include "quadsim/morphology.hpp"

namespace quadsim {

// foot positions and Jacobians for a flat batch of leg configurations,
// e.g. workspace sampling or rollout preprocessing
struct BatchKinematics {
  std::vector<Vec3> foot_positions;
  std::vector<Mat3> jacobians;
};

// serial reference implementation
BatchKinematics batch_leg_kinematics_serial(const std::vector<LegState>& states,
                                            const RobotModel& model);

// OpenMP-parallel over batch rows; every write is disjoint and the per-row
// arithmetic is identical, so results are bit-identical to the serial
// reference at any thread count
BatchKinematics batch_leg_kinematics_parallel(
    const std::vector<LegState>& states, const RobotModel& model);

BatchKinematics batch_leg_kinematics(const std::vector<LegState>& states,
                                     const RobotModel& model, bool parallel);

}  // namespace quadsim
