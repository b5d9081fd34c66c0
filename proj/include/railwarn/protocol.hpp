#pragma once

// Train broadcast (BSM) and receiver-side warning logic for the direct
// (train to vehicle) and indirect (train to roadside unit) cases.

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <string>

#include "railwarn/geometry.hpp"
#include "railwarn/link.hpp"
#include "railwarn/rng.hpp"

namespace railwarn::protocol {

inline constexpr std::size_t kBsmWireSize = 99;

struct TrainState {
  std::uint64_t train_id = 1;
  double position_m = 0.0;  // signed track position, crossing at 0
  double speed_mps = 0.0;
  double heading_deg = 0.0;
  double acceleration_mps2 = 0.0;
  bool brake_applied = false;
};

struct BsmMessage {
  std::uint32_t message_count = 0;
  std::uint64_t train_id = 0;
  double gps_position_m = 0.0;
  float speed_mps = 0.0F;
  float heading_deg = 0.0F;
  float acceleration_mps2 = 0.0F;
  bool brake_status = false;
  std::uint64_t tx_timestamp_us = 0;

  bool operator==(const BsmMessage&) const = default;
};

/// Fixed little-endian layout: count u32, id u64, position f64, speed f32,
/// heading f32, accel f32, brake u8, timestamp u64, zero padding to 99 bytes.
std::array<std::uint8_t, kBsmWireSize> serialize(const BsmMessage& msg);
BsmMessage deserialize(std::span<const std::uint8_t> bytes);

BsmMessage generate_bsm(const TrainState& train, std::uint32_t seq, double tx_time_s);

enum class WarningMode { Direct, Indirect };

std::string to_string(WarningMode mode);
WarningMode mode_for(geometry::ReceiverKind kind);

struct WarningEvent {
  std::string receiver_id;
  geometry::ReceiverKind source = geometry::ReceiverKind::RSU;
  WarningMode mode = WarningMode::Indirect;
  double trigger_time_s = 0.0;
  double train_position_m = 0.0;  // signed position carried by the triggering packet
  int packets_seen = 0;

  /// Remaining distance to the crossing at trigger: the realised d_warn.
  double warning_distance_m() const { return -train_position_m; }

  bool operator==(const WarningEvent&) const = default;
};

struct TriggerPolicy {
  int reliability_threshold = 5;       // K distinct packets
  double trigger_distance_m = 1000.0;  // only packets at d_t <= this count
  double window_s = 5.0;               // K packets must arrive within this horizon

  void validate() const;

  bool operator==(const TriggerPolicy&) const = default;
};

/// Per-pass receiver state. Edge-triggered: at most one event per pass.
struct ReceiverState {
  std::string receiver_id;
  geometry::ReceiverKind kind = geometry::ReceiverKind::RSU;

  std::set<std::uint32_t> seen;                          // all decoded counts
  std::deque<std::pair<double, std::uint32_t>> qualifying;  // (rx time, count) in range
  std::optional<std::uint32_t> last_count;
  int reordered = 0;
  int received = 0;
  std::optional<WarningEvent> event;

  ReceiverState() = default;
  ReceiverState(std::string id, geometry::ReceiverKind k) : receiver_id(std::move(id)), kind(k) {}

  /// True once a pass has ended without an event.
  bool warning_failed() const { return !event.has_value(); }
};

/// Feeds one decoded packet. Returns the event the first time K distinct
/// packets from an approaching train within the trigger distance have
/// arrived inside the window. Duplicates are ignored; out-of-order counts are
/// accepted and tallied in `reordered`.
std::optional<WarningEvent> receiver_ingest(const BsmMessage& msg, double rx_time_s,
                                            ReceiverState& state, const TriggerPolicy& policy);

/// Delivery time of an indirect warning after the roadside unit relays it
/// over one more hop of `relay_range_m`. Throws std::invalid_argument for
/// direct-mode events.
double rsu_relay(const WarningEvent& event, const link::LatencyModel& model, Rng& rng,
                 double relay_range_m = 0.0);

}  // namespace railwarn::protocol
