#include "quadsim/canbus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace quadsim {

namespace {

void put_f32(std::vector<uint8_t>& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  out.push_back(static_cast<uint8_t>(bits & 0xff));
  out.push_back(static_cast<uint8_t>((bits >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((bits >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((bits >> 24) & 0xff));
}

float get_f32(const std::vector<uint8_t>& in, size_t offset) {
  uint32_t bits = static_cast<uint32_t>(in[offset]) |
                  (static_cast<uint32_t>(in[offset + 1]) << 8) |
                  (static_cast<uint32_t>(in[offset + 2]) << 16) |
                  (static_cast<uint32_t>(in[offset + 3]) << 24);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

void require_finite(float v, const char* field) {
  if (!std::isfinite(v))
    throw EncodeError(std::string("non-finite field: ") + field);
}

}  // namespace

std::vector<uint8_t> encode_command(const ActuatorCommandMsg& msg) {
  require_finite(msg.position_cmd, "position_cmd");
  require_finite(msg.velocity_cmd, "velocity_cmd");
  require_finite(msg.feedforward_torque, "feedforward_torque");
  require_finite(msg.kp_scale, "kp_scale");
  require_finite(msg.kd_scale, "kd_scale");
  std::vector<uint8_t> out;
  out.reserve(ActuatorCommandMsg::kEncodedSize);
  out.push_back(ActuatorCommandMsg::kMsgType);
  put_f32(out, msg.position_cmd);
  put_f32(out, msg.velocity_cmd);
  put_f32(out, msg.feedforward_torque);
  put_f32(out, msg.kp_scale);
  put_f32(out, msg.kd_scale);
  return out;
}

ActuatorCommandMsg decode_command(const std::vector<uint8_t>& bytes) {
  if (bytes.empty()) throw DecodeError("empty payload", 0);
  if (bytes[0] != ActuatorCommandMsg::kMsgType)
    throw DecodeError("unexpected msg_type for command", 0);
  if (bytes.size() != ActuatorCommandMsg::kEncodedSize)
    throw DecodeError("command payload must be 21 bytes",
                      std::min(bytes.size(), ActuatorCommandMsg::kEncodedSize));
  ActuatorCommandMsg m;
  m.position_cmd = get_f32(bytes, 1);
  m.velocity_cmd = get_f32(bytes, 5);
  m.feedforward_torque = get_f32(bytes, 9);
  m.kp_scale = get_f32(bytes, 13);
  m.kd_scale = get_f32(bytes, 17);
  return m;
}

std::vector<uint8_t> encode_telemetry(const TelemetryMsg& msg) {
  require_finite(msg.position, "position");
  require_finite(msg.velocity, "velocity");
  require_finite(msg.torque_estimate, "torque_estimate");
  require_finite(msg.driver_temp, "driver_temp");
  std::vector<uint8_t> out;
  out.reserve(TelemetryMsg::kEncodedSize);
  out.push_back(TelemetryMsg::kMsgType);
  put_f32(out, msg.position);
  put_f32(out, msg.velocity);
  put_f32(out, msg.torque_estimate);
  put_f32(out, msg.driver_temp);
  out.push_back(msg.fault_code);
  return out;
}

TelemetryMsg decode_telemetry(const std::vector<uint8_t>& bytes) {
  if (bytes.empty()) throw DecodeError("empty payload", 0);
  if (bytes[0] != TelemetryMsg::kMsgType)
    throw DecodeError("unexpected msg_type for telemetry", 0);
  if (bytes.size() != TelemetryMsg::kEncodedSize)
    throw DecodeError("telemetry payload must be 18 bytes",
                      std::min(bytes.size(), TelemetryMsg::kEncodedSize));
  TelemetryMsg m;
  m.position = get_f32(bytes, 1);
  m.velocity = get_f32(bytes, 5);
  m.torque_estimate = get_f32(bytes, 9);
  m.driver_temp = get_f32(bytes, 13);
  m.fault_code = bytes[17];
  return m;
}

void BusTopology::validate() const {
  if (buses < 1) throw ConfigError("bus.buses must be >= 1");
  if (nodes_per_bus < 1) throw ConfigError("bus.nodes_per_bus must be >= 1");
  if (!(bitrate > 0.0)) throw ConfigError("bus.bitrate must be > 0");
  if (overhead_bits < 0) throw ConfigError("bus.overhead_bits must be >= 0");
  if (!(wire_rating_a > 0.0)) throw ConfigError("bus.wire_rating_a must be > 0");
}

uint16_t command_frame_id(int node) {
  if (node < 1 || node > 3) throw ConfigError("node id must be 1..3");
  return static_cast<uint16_t>(node);
}

uint16_t telemetry_frame_id(int node) {
  if (node < 1 || node > 3) throw ConfigError("node id must be 1..3");
  return static_cast<uint16_t>(0x10 + node);
}

double frame_duration(const CanFrame& frame, const BusTopology& topo) {
  return (8.0 * static_cast<double>(frame.payload.size()) +
          static_cast<double>(topo.overhead_bits)) /
         topo.bitrate;
}

TransmitResult bus_transmit(const std::vector<CanFrame>& frames,
                            const BusTopology& topo, double tick_period) {
  topo.validate();
  if (!(tick_period > 0.0)) throw ConfigError("tick_period must be > 0");
  for (const CanFrame& f : frames) {
    if (f.arbitration_id >= 2048)
      throw ConfigError("arbitration id must fit in 11 bits");
    if (f.payload.size() > 64)
      throw ConfigError("payload must be at most 64 bytes");
    if (f.bus < 0 || f.bus >= topo.buses)
      throw ConfigError("frame tagged with unknown bus index");
  }

  TransmitResult out;
  out.utilization.assign(static_cast<size_t>(topo.buses), 0.0);
  std::vector<CanFrame> dropped;

  for (int bus = 0; bus < topo.buses; ++bus) {
    std::vector<CanFrame> queue;
    for (const CanFrame& f : frames)
      if (f.bus == bus) queue.push_back(f);
    // stable: submission order breaks id ties deterministically
    std::stable_sort(queue.begin(), queue.end(),
                     [](const CanFrame& a, const CanFrame& b) {
                       return a.arbitration_id < b.arbitration_id;
                     });
    double total = 0.0;
    for (const CanFrame& f : queue) total += frame_duration(f, topo);
    while (total > tick_period && !queue.empty()) {
      // shed from the lowest-priority end
      total -= frame_duration(queue.back(), topo);
      dropped.push_back(queue.back());
      queue.pop_back();
    }
    double busy = 0.0;
    for (const CanFrame& f : queue) {
      busy += frame_duration(f, topo);
      out.deliveries.push_back({f, busy});
    }
    out.utilization[static_cast<size_t>(bus)] = busy / tick_period;
  }
  for (double u : out.utilization)
    out.max_utilization = std::max(out.max_utilization, u);

  if (!dropped.empty()) {
    // report the requested (not achieved) load
    double requested = 0.0;
    for (const CanFrame& f : frames) requested += frame_duration(f, topo);
    throw BusOverrunError(
        "bus overrun: " + std::to_string(dropped.size()) +
            " frame(s) dropped, requested busy time " +
            std::to_string(requested) + " s in a " +
            std::to_string(tick_period) + " s tick",
        std::move(dropped));
  }
  return out;
}

DaisyChainReport leg_daisy_chain_power_check(
    const BusTopology& topo, const std::array<double, 3>& actuator_draws) {
  topo.validate();
  for (double a : actuator_draws)
    if (a < 0.0) throw ConfigError("actuator current draws must be >= 0");
  DaisyChainReport r;
  r.segment_current[2] = actuator_draws[2];
  r.segment_current[1] = actuator_draws[1] + actuator_draws[2];
  r.segment_current[0] =
      actuator_draws[0] + actuator_draws[1] + actuator_draws[2];
  for (int i = 0; i < 3; ++i)
    if (r.segment_current[static_cast<size_t>(i)] > topo.wire_rating_a)
      r.over_rating_segments.push_back(i);
  return r;
}

}  // namespace quadsim
