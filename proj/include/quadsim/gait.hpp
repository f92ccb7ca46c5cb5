#pragma once

#include <array>

#include "quadsim/types.hpp"

namespace quadsim {

enum class GaitName { Stand, Trot, Crawl };

const char* to_string(GaitName name);

struct GaitSchedule {
  GaitName name = GaitName::Stand;
  double period = 1.0;       // s
  double duty_factor = 1.0;  // stance fraction of the cycle
  std::array<double, kNumLegs> phase_offsets = {0.0, 0.0, 0.0, 0.0};  // FL FR RL RR
  double swing_height = 0.06;  // m

  double stance_duration() const { return duty_factor * period; }
  void validate() const;

  static GaitSchedule stand();
  static GaitSchedule trot();
  static GaitSchedule crawl();
};

struct LegPhase {
  double phase = 0.0;  // [0, 1)
  bool stance = true;
};

std::array<LegPhase, kNumLegs> leg_phase(double t, const GaitSchedule& schedule);

// How much of its share of the body weight a leg should carry: 0 in swing,
// ramping smoothly over the first and last `ramp_fraction` of the stance span
// so load transfers before liftoff and after touchdown instead of stepping.
// `ramp_in = false` skips the touchdown ramp (for legs that never lifted off,
// e.g. in the first cycle after standing).
double stance_load_weight(double phase, double duty_factor,
                          double ramp_fraction, bool ramp_in = true);

// C1 swing curve: cycloid-timed horizontal motion, raised-cosine vertical bump
// peaking at max(start_z, target_z) + height at s = 0.5; zero vertical
// velocity at both ends
Vec3 swing_trajectory(double s, const Vec3& start, const Vec3& target,
                      double height);

// Raibert-style heuristic, result projected onto the terrain plane
Vec3 foothold_target(const Vec3& velocity_cmd, const Vec3& velocity_actual,
                     double stance_duration, const Vec3& hip_projection,
                     const GroundPlane& plane, double velocity_gain = 0.03);

}  // namespace quadsim
