#include "quadsim/gait.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadsim {

const char* to_string(GaitName name) {
  switch (name) {
    case GaitName::Stand: return "stand";
    case GaitName::Trot: return "trot";
    case GaitName::Crawl: return "crawl";
  }
  return "??";
}

void GaitSchedule::validate() const {
  if (!(period > 0.0)) throw ConfigError("gait.period_s must be > 0");
  if (!(duty_factor > 0.0 && duty_factor <= 1.0))
    throw ConfigError("gait.duty_factor must be in (0, 1]");
  for (double off : phase_offsets)
    if (off < 0.0 || off >= 1.0)
      throw ConfigError("gait.phase_offsets must be in [0, 1)");
  if (swing_height < 0.0) throw ConfigError("gait.swing_height_m must be >= 0");
  if (name == GaitName::Stand && duty_factor != 1.0)
    throw ConfigError("stand gait requires duty_factor = 1");
  if (name == GaitName::Crawl && duty_factor < 0.75)
    throw ConfigError("crawl gait requires duty_factor >= 0.75");
}

GaitSchedule GaitSchedule::stand() {
  GaitSchedule g;
  g.name = GaitName::Stand;
  g.period = 1.0;
  g.duty_factor = 1.0;
  g.phase_offsets = {0.0, 0.0, 0.0, 0.0};
  g.swing_height = 0.0;
  return g;
}

GaitSchedule GaitSchedule::trot() {
  GaitSchedule g;
  g.name = GaitName::Trot;
  g.period = 0.5;
  g.duty_factor = 0.5;
  g.phase_offsets = {0.0, 0.5, 0.5, 0.0};  // diagonal pairs together
  g.swing_height = 0.06;
  return g;
}

GaitSchedule GaitSchedule::crawl() {
  GaitSchedule g;
  g.name = GaitName::Crawl;
  g.period = 1.2;
  g.duty_factor = 0.8;
  g.phase_offsets = {0.0, 0.5, 0.25, 0.75};  // swing order FL, RR, FR, RL
  g.swing_height = 0.06;
  return g;
}

std::array<LegPhase, kNumLegs> leg_phase(double t,
                                         const GaitSchedule& schedule) {
  if (!(schedule.period > 0.0)) throw ConfigError("gait.period_s must be > 0");
  std::array<LegPhase, kNumLegs> out;
  for (int i = 0; i < kNumLegs; ++i) {
    double p = t / schedule.period + schedule.phase_offsets[i];
    p -= std::floor(p);
    out[i].phase = p;
    out[i].stance = p < schedule.duty_factor;
  }
  return out;
}

double stance_load_weight(double phase, double duty_factor,
                          double ramp_fraction, bool ramp_in) {
  if (!(duty_factor > 0.0) || duty_factor > 1.0)
    throw ConfigError("gait.duty_factor must be in (0, 1]");
  if (ramp_fraction < 0.0 || ramp_fraction > 0.5)
    throw ConfigError("load_ramp_fraction must be in [0, 0.5]");
  if (phase >= duty_factor) return 0.0;      // swing
  if (duty_factor >= 1.0) return 1.0;        // never lifts off
  if (ramp_fraction <= 0.0) return 1.0;
  const double s = phase / duty_factor;      // position within the stance span
  double u = std::min(1.0, (1.0 - s) / ramp_fraction);
  if (ramp_in) u = std::min(u, std::min(1.0, s / ramp_fraction));
  return u * u * (3.0 - 2.0 * u);            // smoothstep
}

Vec3 swing_trajectory(double s, const Vec3& start, const Vec3& target,
                      double height) {
  if (s < 0.0 || s > 1.0)
    throw std::invalid_argument("swing_trajectory: phase must be in [0, 1]");
  // cycloidal timing: zero horizontal velocity at both ends
  const double sigma = s - std::sin(2.0 * kPi * s) / (2.0 * kPi);
  Vec3 p = (1.0 - sigma) * start + sigma * target;  // exact at both endpoints

  const double apex = std::max(start.z(), target.z()) + height;
  if (s <= 0.5) {
    p.z() = start.z() + (apex - start.z()) * 0.5 * (1.0 - std::cos(2.0 * kPi * s));
  } else {
    const double u = 1.0 - s;
    p.z() = target.z() + (apex - target.z()) * 0.5 * (1.0 - std::cos(2.0 * kPi * u));
  }
  return p;
}

Vec3 foothold_target(const Vec3& velocity_cmd, const Vec3& velocity_actual,
                     double stance_duration, const Vec3& hip_projection,
                     const GroundPlane& plane, double velocity_gain) {
  const Vec3 raw = hip_projection + 0.5 * stance_duration * velocity_cmd +
                   velocity_gain * (velocity_actual - velocity_cmd);
  return plane.project(raw);
}

}  // namespace quadsim
