#pragma once

// Deterministic single-train pass simulator.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "railwarn/geometry.hpp"
#include "railwarn/link.hpp"
#include "railwarn/protocol.hpp"

namespace railwarn::sim {

struct TrainRun {
  std::uint64_t train_id = 1;
  double speed_mps = 0.0;
  double start_m = -400.0;
  double end_m = 400.0;

  bool operator==(const TrainRun&) const = default;
};

struct AnalysisDefaults {
  double window_m = 50.0;
  int threshold = 5;
  double reaction_time_s = 3.5;
  double system_delay_s = 0.005;
  /// Adds v_t * t_s to the minimum-required-range rule.
  bool min_range_includes_system_delay = false;

  bool operator==(const AnalysisDefaults&) const = default;
};

struct Scenario {
  int version = 1;
  geometry::CrossingScene scene;
  link::RadioConfig radio;
  link::LinkSource channel = link::SyntheticChannel{};
  link::LatencyModel latency;
  geometry::AntennaPattern tx_antenna = geometry::AntennaPattern::builtin("omni12");
  geometry::AntennaPattern rx_antenna = geometry::AntennaPattern::builtin("omni6");
  TrainRun train;
  protocol::TriggerPolicy policy;
  AnalysisDefaults analysis;
  std::uint64_t seed = 1;

  /// Throws ConfigError on any invariant violation.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

struct PacketRecord {
  std::uint32_t seq = 0;
  double tx_time_s = 0.0;
  double train_position_m = 0.0;
  std::string receiver_id;
  bool decoded = false;
  std::optional<double> rx_time_s;
  std::optional<double> latency_s;

  bool operator==(const PacketRecord&) const = default;
};

struct ReceiverLog {
  std::string receiver_id;
  geometry::ReceiverKind kind = geometry::ReceiverKind::RSU;
  std::vector<PacketRecord> records;  // ordered by seq
  int reordered = 0;

  bool operator==(const ReceiverLog&) const = default;
};

struct LoggedWarning {
  protocol::WarningEvent event;
  /// When the warning reaches the vehicle: the trigger time for direct
  /// mode, the trigger time plus the relay hop for indirect mode.
  double delivery_time_s = 0.0;

  bool operator==(const LoggedWarning&) const = default;
};

struct SimLog {
  std::string scenario_digest;
  std::uint64_t seed = 0;
  double tx_period_s = 0.05;
  double train_speed_mps = 0.0;
  double pass_duration_s = 0.0;
  std::uint64_t packets_transmitted = 0;
  std::vector<ReceiverLog> receivers;
  std::vector<LoggedWarning> warnings;

  const ReceiverLog& receiver(const std::string& id) const;

  bool operator==(const SimLog&) const = default;
};

/// floor(duration / period) + 1 packets, the first at t = 0.
std::uint64_t packet_count(double pass_duration_s, double tx_period_s);

SimLog run_pass(const Scenario& scenario, std::uint64_t seed);
inline SimLog run_pass(const Scenario& scenario) { return run_pass(scenario, scenario.seed); }

/// Empty dimensions keep the base scenario's value.
struct SweepGrid {
  std::vector<double> train_speeds_mph;
  std::vector<double> tx_powers_dbm;
  std::vector<link::Modulation> modulations;
  std::vector<std::string> tx_antennas;  // built-in pattern names
};

struct SweepPoint {
  double train_speed_mps = 0.0;
  double tx_power_dbm = 0.0;
  link::Modulation modulation = link::Modulation::QPSK;
  std::string tx_antenna;
  std::uint64_t seed = 0;
  SimLog log;
};

struct SweepOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  /// Optional permutation of point indices to execute; results are always
  /// returned in grid order.
  std::vector<std::size_t> execution_order;
};

/// Grid order: speed, power, modulation, antenna, then seed (last varies fastest).
std::vector<Scenario> expand_grid(const Scenario& base, const SweepGrid& grid);

std::vector<SweepPoint> run_sweep(const Scenario& base, const SweepGrid& grid,
                                  const std::vector<std::uint64_t>& seeds,
                                  const SweepOptions& options = {});

}  // namespace railwarn::sim
