#include "quadsim/morphology.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_io.hpp"

namespace quadsim {

namespace {

using nlohmann::json;

void check_mesh(const TransmissionSpec& spec, const std::string& where) {
  if (spec.ring_teeth != spec.sun_teeth + 2 * spec.planet_teeth) {
    std::ostringstream os;
    os << where << ": mesh condition violated, ring_teeth ("
       << spec.ring_teeth << ") != sun_teeth + 2*planet_teeth ("
       << spec.sun_teeth + 2 * spec.planet_teeth << ")";
    throw ModelValidationError(os.str());
  }
}

void check_spec(const TransmissionSpec& spec, const std::string& where) {
  check_mesh(spec, where);
  if (spec.sun_teeth < 8 || spec.planet_teeth < 8 || spec.ring_teeth < 8)
    throw ModelValidationError(where + ": gear tooth counts must be >= 8");
  if (spec.drive_sprocket_teeth && *spec.drive_sprocket_teeth < 8)
    throw ModelValidationError(where + ": drive_sprocket_teeth must be >= 8");
  if (spec.driven_sprocket_teeth && *spec.driven_sprocket_teeth < 8)
    throw ModelValidationError(where + ": driven_sprocket_teeth must be >= 8");
  if (!(spec.efficiency > 0.0 && spec.efficiency <= 1.0))
    throw ModelValidationError(where + ": efficiency must be in (0, 1]");
}

}  // namespace

double planetary_ratio(const TransmissionSpec& spec) {
  check_mesh(spec, "transmission");
  return 1.0 + static_cast<double>(spec.ring_teeth) /
                   static_cast<double>(spec.sun_teeth);
}

double joint_reduction(JointId joint, const TransmissionSpec& spec) {
  double planetary;
  try {
    planetary = planetary_ratio(spec);
  } catch (const ModelValidationError&) {
    check_mesh(spec, to_string(joint));  // rethrow naming the joint
    throw;
  }
  if (joint != JointId::Knee) return planetary;
  if (!spec.drive_sprocket_teeth || !spec.driven_sprocket_teeth)
    throw ModelValidationError("knee: transmission missing sprocket teeth");
  return planetary * static_cast<double>(*spec.driven_sprocket_teeth) /
         static_cast<double>(*spec.drive_sprocket_teeth);
}

std::array<double, kJointsPerLeg> leg_reductions(const RobotModel& model) {
  return {joint_reduction(JointId::Abad, model.transmission(JointId::Abad)),
          joint_reduction(JointId::Hip, model.transmission(JointId::Hip)),
          joint_reduction(JointId::Knee, model.transmission(JointId::Knee))};
}

Vec3 actuator_to_joint(const Vec3& q_act,
                       const std::array<double, kJointsPerLeg>& reductions) {
  return Vec3(q_act[0] / reductions[0], q_act[1] / reductions[1],
              q_act[2] / reductions[2]);
}

Vec3 joint_to_actuator(const Vec3& q_joint,
                       const std::array<double, kJointsPerLeg>& reductions) {
  return Vec3(q_joint[0] * reductions[0], q_joint[1] * reductions[1],
              q_joint[2] * reductions[2]);
}

Vec3 torque_joint_to_actuator(
    const Vec3& tau_joint,
    const std::array<double, kJointsPerLeg>& reductions) {
  return Vec3(tau_joint[0] / reductions[0], tau_joint[1] / reductions[1],
              tau_joint[2] / reductions[2]);
}

ClampResult clamp_to_limits(const Vec3& q, const JointLimits& limits) {
  ClampResult out;
  out.q = q;
  for (int i = 0; i < kJointsPerLeg; ++i) {
    if (out.q[i] < limits.lower[i]) {
      out.q[i] = limits.lower[i];
      out.violated[i] = true;
    } else if (out.q[i] > limits.upper[i]) {
      out.q[i] = limits.upper[i];
      out.violated[i] = true;
    }
  }
  return out;
}

Mat3 RobotModel::base_inertia() const {
  const double m = total_mass;
  const double l = torso_dims[0], w = torso_dims[1], h = torso_dims[2];
  Mat3 inertia = Mat3::Zero();
  inertia(0, 0) = m / 12.0 * (w * w + h * h);
  inertia(1, 1) = m / 12.0 * (l * l + h * h);
  inertia(2, 2) = m / 12.0 * (l * l + w * w);
  return inertia;
}

void RobotModel::validate() const {
  if (!(total_mass > 0.0)) throw ModelValidationError("total_mass_kg must be > 0");
  if (!(leg_mass > 0.0)) throw ModelValidationError("leg_mass_kg must be > 0");
  if (!(actuator_mass > 0.0))
    throw ModelValidationError("actuator_mass_kg must be > 0");
  if (!(total_mass > 4.0 * leg_mass))
    throw ModelValidationError("total_mass_kg must exceed 4 * leg_mass_kg");
  if (!(thigh_length > 0.0))
    throw ModelValidationError("thigh_length_m must be > 0");
  if (!(shank_length > 0.0))
    throw ModelValidationError("shank_length_m must be > 0");
  if (abad_offset < 0.0)
    throw ModelValidationError("abad_offset_m must be >= 0");
  if (!(torso_dims.array() > 0.0).all())
    throw ModelValidationError("torso_dims_m must all be > 0");

  for (int i = 0; i < kJointsPerLeg; ++i) {
    if (!(joint_limits.lower[i] < joint_limits.upper[i])) {
      std::ostringstream os;
      os << "joint_limits." << to_string(static_cast<JointId>(i))
         << ": lower must be < upper";
      throw ModelValidationError(os.str());
    }
  }

  // left/right mirror symmetry about the sagittal (xz) plane
  auto check_mirror = [&](LegId left, LegId right) {
    const Vec3& l = hip_offset(left);
    const Vec3& r = hip_offset(right);
    if (l.x() != r.x() || l.y() != -r.y() || l.z() != r.z()) {
      std::ostringstream os;
      os << "hip_offsets_m: " << to_string(left) << "/" << to_string(right)
         << " are not mirror symmetric";
      throw ModelValidationError(os.str());
    }
  };
  check_mirror(LegId::FL, LegId::FR);
  check_mirror(LegId::RL, LegId::RR);

  for (int j = 0; j < kJointsPerLeg; ++j) {
    const auto joint = static_cast<JointId>(j);
    check_spec(transmissions[j], std::string("transmissions.") + to_string(joint));
    joint_reduction(joint, transmissions[j]);
  }
}

namespace {

json spec_to_json(const TransmissionSpec& s) {
  json j{{"sun_teeth", s.sun_teeth},
         {"planet_teeth", s.planet_teeth},
         {"ring_teeth", s.ring_teeth},
         {"efficiency", s.efficiency}};
  if (s.drive_sprocket_teeth) j["drive_sprocket_teeth"] = *s.drive_sprocket_teeth;
  if (s.driven_sprocket_teeth)
    j["driven_sprocket_teeth"] = *s.driven_sprocket_teeth;
  return j;
}

TransmissionSpec spec_from_json(const json& j, const TransmissionSpec& base,
                                const std::string& where) {
  TransmissionSpec s = base;
  try {
    s.sun_teeth = get_or(j, "sun_teeth", s.sun_teeth);
    s.planet_teeth = get_or(j, "planet_teeth", s.planet_teeth);
    s.ring_teeth = get_or(j, "ring_teeth", s.ring_teeth);
    s.efficiency = get_or(j, "efficiency", s.efficiency);
    if (j.contains("drive_sprocket_teeth"))
      s.drive_sprocket_teeth = j.at("drive_sprocket_teeth").get<int>();
    if (j.contains("driven_sprocket_teeth"))
      s.driven_sprocket_teeth = j.at("driven_sprocket_teeth").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return s;
}

Vec3 vec3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(where + ": expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

json robot_to_json(const RobotModel& m) {
  json j;
  j["total_mass_kg"] = m.total_mass;
  j["leg_mass_kg"] = m.leg_mass;
  j["actuator_mass_kg"] = m.actuator_mass;
  j["torso_dims_m"] = {m.torso_dims[0], m.torso_dims[1], m.torso_dims[2]};
  json offs;
  for (LegId leg : kLegOrder) {
    const Vec3& p = m.hip_offset(leg);
    offs[to_string(leg)] = {p[0], p[1], p[2]};
  }
  j["hip_offsets_m"] = offs;
  j["abad_offset_m"] = m.abad_offset;
  j["thigh_length_m"] = m.thigh_length;
  j["shank_length_m"] = m.shank_length;
  json lim;
  for (int i = 0; i < kJointsPerLeg; ++i) {
    lim[to_string(static_cast<JointId>(i))] = {m.joint_limits.lower[i],
                                               m.joint_limits.upper[i]};
  }
  // radians, so a save/load cycle reproduces the model bit for bit
  j["joint_limits_rad"] = lim;
  json tr;
  for (int i = 0; i < kJointsPerLeg; ++i)
    tr[to_string(static_cast<JointId>(i))] = spec_to_json(m.transmissions[i]);
  j["transmissions"] = tr;
  return j;
}

RobotModel robot_from_json(const json& j, const RobotModel& base) {
  RobotModel m = base;
  try {
    m.total_mass = get_or(j, "total_mass_kg", m.total_mass);
    m.leg_mass = get_or(j, "leg_mass_kg", m.leg_mass);
    m.actuator_mass = get_or(j, "actuator_mass_kg", m.actuator_mass);
    if (j.contains("torso_dims_m"))
      m.torso_dims = vec3_from_json(j.at("torso_dims_m"), "torso_dims_m");
    if (j.contains("hip_offsets_m")) {
      const json& offs = j.at("hip_offsets_m");
      for (LegId leg : kLegOrder) {
        if (!offs.contains(to_string(leg))) continue;
        m.hip_offsets[static_cast<int>(leg)] =
            vec3_from_json(offs.at(to_string(leg)),
                           std::string("hip_offsets_m.") + to_string(leg));
      }
    }
    m.abad_offset = get_or(j, "abad_offset_m", m.abad_offset);
    m.thigh_length = get_or(j, "thigh_length_m", m.thigh_length);
    m.shank_length = get_or(j, "shank_length_m", m.shank_length);
    if (j.contains("joint_limits_rad")) {
      const json& lim = j.at("joint_limits_rad");
      for (int i = 0; i < kJointsPerLeg; ++i) {
        if (!lim.contains(to_string(static_cast<JointId>(i)))) continue;
        const json& pair = lim.at(to_string(static_cast<JointId>(i)));
        if (!pair.is_array() || pair.size() != 2)
          throw ConfigError("joint_limits_rad entries must be [lower, upper]");
        m.joint_limits.lower[i] = pair[0].get<double>();
        m.joint_limits.upper[i] = pair[1].get<double>();
      }
    }
    if (j.contains("transmissions")) {
      const json& tr = j.at("transmissions");
      for (int i = 0; i < kJointsPerLeg; ++i) {
        const auto joint = static_cast<JointId>(i);
        if (!tr.contains(to_string(joint))) continue;
        m.transmissions[i] =
            spec_from_json(tr.at(to_string(joint)), m.transmissions[i],
                           std::string("transmissions.") + to_string(joint));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("robot model: ") + e.what());
  }
  m.validate();
  return m;
}

RobotModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const json& robot = j.contains("robot") ? j.at("robot") : j;
  return robot_from_json(robot, RobotModel{});
}

void save_model(const RobotModel& model, const std::string& path) {
  json j;
  j["robot"] = robot_to_json(model);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model config: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace quadsim
