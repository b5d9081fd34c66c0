#include "railwarn/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "railwarn/error.hpp"

namespace railwarn::protocol {

namespace {

template <typename T>
void put(std::array<std::uint8_t, kBsmWireSize>& buf, std::size_t& off, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<std::uint8_t, sizeof(T)> raw{};
  std::memcpy(raw.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  std::memcpy(buf.data() + off, raw.data(), sizeof(T));
  off += sizeof(T);
}

template <typename T>
T get(std::span<const std::uint8_t> buf, std::size_t& off) {
  std::array<std::uint8_t, sizeof(T)> raw{};
  std::memcpy(raw.data(), buf.data() + off, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  off += sizeof(T);
  return value;
}

}  // namespace

std::array<std::uint8_t, kBsmWireSize> serialize(const BsmMessage& msg) {
  std::array<std::uint8_t, kBsmWireSize> buf{};
  std::size_t off = 0;
  put(buf, off, msg.message_count);
  put(buf, off, msg.train_id);
  put(buf, off, msg.gps_position_m);
  put(buf, off, msg.speed_mps);
  put(buf, off, msg.heading_deg);
  put(buf, off, msg.acceleration_mps2);
  put(buf, off, static_cast<std::uint8_t>(msg.brake_status ? 1 : 0));
  put(buf, off, msg.tx_timestamp_us);
  return buf;
}

BsmMessage deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kBsmWireSize) {
    throw std::invalid_argument("BSM: expected " + std::to_string(kBsmWireSize) + " bytes, got " +
                                std::to_string(bytes.size()));
  }
  BsmMessage m;
  std::size_t off = 0;
  m.message_count = get<std::uint32_t>(bytes, off);
  m.train_id = get<std::uint64_t>(bytes, off);
  m.gps_position_m = get<double>(bytes, off);
  m.speed_mps = get<float>(bytes, off);
  m.heading_deg = get<float>(bytes, off);
  m.acceleration_mps2 = get<float>(bytes, off);
  m.brake_status = get<std::uint8_t>(bytes, off) != 0;
  m.tx_timestamp_us = get<std::uint64_t>(bytes, off);
  return m;
}

BsmMessage generate_bsm(const TrainState& train, std::uint32_t seq, double tx_time_s) {
  BsmMessage m;
  m.message_count = seq;
  m.train_id = train.train_id;
  m.gps_position_m = train.position_m;
  m.speed_mps = static_cast<float>(train.speed_mps);
  m.heading_deg = static_cast<float>(train.heading_deg);
  m.acceleration_mps2 = static_cast<float>(train.acceleration_mps2);
  m.brake_status = train.brake_applied;
  m.tx_timestamp_us = static_cast<std::uint64_t>(std::llround(tx_time_s * 1e6));
  return m;
}

std::string to_string(WarningMode mode) {
  return mode == WarningMode::Direct ? "direct" : "indirect";
}

WarningMode mode_for(geometry::ReceiverKind kind) {
  return kind == geometry::ReceiverKind::RSU ? WarningMode::Indirect : WarningMode::Direct;
}

void TriggerPolicy::validate() const {
  if (reliability_threshold < 1) throw ConfigError("policy.reliability_threshold must be >= 1");
  if (!(trigger_distance_m >= 0.0)) throw ConfigError("policy.trigger_distance_m must be >= 0");
  if (!(window_s > 0.0)) throw ConfigError("policy.window_s must be > 0");
}

std::optional<WarningEvent> receiver_ingest(const BsmMessage& msg, double rx_time_s,
                                            ReceiverState& state, const TriggerPolicy& policy) {
  if (!state.seen.insert(msg.message_count).second) return std::nullopt;
  ++state.received;
  if (state.last_count && msg.message_count < *state.last_count) {
    ++state.reordered;
  } else {
    state.last_count = msg.message_count;
  }
  if (state.event) return std::nullopt;

  const bool approaching = msg.gps_position_m <= 0.0;
  const bool in_range = -msg.gps_position_m <= policy.trigger_distance_m;
  if (!approaching || !in_range) return std::nullopt;

  state.qualifying.emplace_back(rx_time_s, msg.message_count);
  while (!state.qualifying.empty() && state.qualifying.front().first < rx_time_s - policy.window_s) {
    state.qualifying.pop_front();
  }
  if (static_cast<int>(state.qualifying.size()) < policy.reliability_threshold) {
    return std::nullopt;
  }
  WarningEvent ev;
  ev.receiver_id = state.receiver_id;
  ev.source = state.kind;
  ev.mode = mode_for(state.kind);
  ev.trigger_time_s = rx_time_s;
  ev.train_position_m = msg.gps_position_m;
  ev.packets_seen = static_cast<int>(state.qualifying.size());
  state.event = ev;
  return ev;
}

double rsu_relay(const WarningEvent& event, const link::LatencyModel& model, Rng& rng,
                 double relay_range_m) {
  if (event.mode != WarningMode::Indirect) {
    throw std::invalid_argument("rsu_relay: only indirect warnings are relayed");
  }
  link::LatencyModel hop = model;
  hop.relay_hops = 1;
  return event.trigger_time_s + link::latency_sample(relay_range_m, hop, rng);
}

}  // namespace railwarn::protocol
