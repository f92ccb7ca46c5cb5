#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadsim/types.hpp"

namespace quadsim {

// one bus per leg, three actuator nodes per bus, FD-style payloads.
// wire layout (little-endian float32 after the type byte) is documented in
// docs/wire_format.md.

struct CanFrame {
  uint16_t arbitration_id = 0;  // 11-bit
  int bus = 0;                  // 0..3, one per leg
  std::vector<uint8_t> payload;
  double timestamp = 0.0;  // s, submission time
};

struct ActuatorCommandMsg {
  static constexpr uint8_t kMsgType = 0x01;
  static constexpr size_t kEncodedSize = 21;
  float position_cmd = 0.0f;        // rad, rotor side
  float velocity_cmd = 0.0f;        // rad/s
  float feedforward_torque = 0.0f;  // Nm, rotor side
  float kp_scale = 0.0f;
  float kd_scale = 0.0f;

  bool operator==(const ActuatorCommandMsg&) const = default;
};

struct TelemetryMsg {
  static constexpr uint8_t kMsgType = 0x02;
  static constexpr size_t kEncodedSize = 18;
  float position = 0.0f;         // rad, rotor side
  float velocity = 0.0f;         // rad/s
  float torque_estimate = 0.0f;  // Nm, rotor side
  float driver_temp = 0.0f;      // degC
  uint8_t fault_code = 0;

  bool operator==(const TelemetryMsg&) const = default;
};

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, size_t offset)
      : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

std::vector<uint8_t> encode_command(const ActuatorCommandMsg& msg);
ActuatorCommandMsg decode_command(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_telemetry(const TelemetryMsg& msg);
TelemetryMsg decode_telemetry(const std::vector<uint8_t>& bytes);

struct BusTopology {
  int buses = 4;
  int nodes_per_bus = 3;  // node ids 1..3 = abad, hip, knee
  double bitrate = 5e6;   // bits/s
  int overhead_bits = 128;
  double wire_rating_a = 20.0;  // daisy-chain segment rating

  void validate() const;
};

// arbitration ids: commands to node n use n, telemetry from node n uses
// 0x10 + n; lower id wins arbitration
uint16_t command_frame_id(int node);
uint16_t telemetry_frame_id(int node);

double frame_duration(const CanFrame& frame, const BusTopology& topo);

struct Delivery {
  CanFrame frame;
  double delivery_time = 0.0;  // s from tick start
};

struct TransmitResult {
  std::vector<Delivery> deliveries;  // ordered per bus by arbitration
  std::vector<double> utilization;   // per bus, busy/tick
  double max_utilization = 0.0;
};

class BusOverrunError : public std::runtime_error {
 public:
  BusOverrunError(const std::string& what, std::vector<CanFrame> dropped)
      : std::runtime_error(what), dropped_(std::move(dropped)) {}
  const std::vector<CanFrame>& dropped() const { return dropped_; }

 private:
  std::vector<CanFrame> dropped_;
};

// per bus: stable sort by arbitration id, sequential delivery; throws
// BusOverrunError (lowest-priority frames dropped) if a bus exceeds the tick
TransmitResult bus_transmit(const std::vector<CanFrame>& frames,
                            const BusTopology& topo, double tick_period);

struct DaisyChainReport {
  std::array<double, 3> segment_current = {0.0, 0.0, 0.0};  // abad, hip, knee
  std::vector<int> over_rating_segments;
};

// segment k carries the sum of downstream draws (abad feeds all three)
DaisyChainReport leg_daisy_chain_power_check(
    const BusTopology& topo, const std::array<double, 3>& actuator_draws);

}  // namespace quadsim
