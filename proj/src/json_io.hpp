#pragma once

#include <json.hpp>

#include "quadsim/morphology.hpp"

namespace quadsim {

// partial-override deserialization: absent keys keep the base value
nlohmann::json robot_to_json(const RobotModel& m);
RobotModel robot_from_json(const nlohmann::json& j, const RobotModel& base);

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

}  // namespace quadsim
