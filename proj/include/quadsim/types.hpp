#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace quadsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kGravity = 9.81;  // m/s^2
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

enum class LegId : int { FL = 0, FR = 1, RL = 2, RR = 3 };
enum class JointId : int { Abad = 0, Hip = 1, Knee = 2 };

inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
inline constexpr int kNumJoints = kNumLegs * kJointsPerLeg;

inline constexpr std::array<LegId, kNumLegs> kLegOrder = {LegId::FL, LegId::FR,
                                                          LegId::RL, LegId::RR};

inline const char* to_string(LegId leg) {
  switch (leg) {
    case LegId::FL: return "FL";
    case LegId::FR: return "FR";
    case LegId::RL: return "RL";
    case LegId::RR: return "RR";
  }
  return "??";
}

inline const char* to_string(JointId joint) {
  switch (joint) {
    case JointId::Abad: return "abad";
    case JointId::Hip: return "hip";
    case JointId::Knee: return "knee";
  }
  return "??";
}

// +1 for left legs, -1 for right legs; mirrors the ab/ad axis and the
// lateral offset about the sagittal plane.
inline double side_sign(LegId leg) {
  return (leg == LegId::FL || leg == LegId::RL) ? 1.0 : -1.0;
}

// infinite plane through `point` with unit `normal`
struct GroundPlane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();

  double signed_distance(const Vec3& p) const {
    return normal.dot(p - point);
  }
  Vec3 project(const Vec3& p) const {
    return p - normal * signed_distance(p);
  }
  // where the vertical line through p meets the plane; assumes normal.z > 0
  // (slopes are capped well below vertical)
  Vec3 project_vertical(const Vec3& p) const {
    return p - Vec3::UnitZ() * (signed_distance(p) / normal.z());
  }
};

class ModelValidationError : public std::runtime_error {
 public:
  explicit ModelValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace quadsim
