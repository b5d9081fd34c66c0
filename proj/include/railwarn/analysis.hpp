#pragma once

// Distance-windowed reception analysis over packet logs, coverage (d_warn)
// extraction, latency statistics and protection-time reporting.
//
// Windows are anchored at the crossing: window k covers train positions
// [k * w, (k + 1) * w), so one edge always sits at 0.

#include <span>
#include <string>
#include <vector>

#include "railwarn/safety.hpp"
#include "railwarn/sim.hpp"

namespace railwarn::analysis {

struct PerBin {
  double d_start_m = 0.0;
  double d_end_m = 0.0;
  double d_center_m = 0.0;
  long long transmitted = 0;
  long long received = 0;
  double per = 0.0;
};

struct PerSeries {
  double window_width_m = 0.0;
  std::vector<PerBin> bins;  // ascending, only windows with transmissions
};

PerSeries bin_per(std::span<const sim::PacketRecord> records, double window_width_m);

struct CountBin {
  double d_start_m = 0.0;
  double d_end_m = 0.0;
  double d_center_m = 0.0;
  long long received = 0;
};

std::vector<CountBin> received_counts(std::span<const sim::PacketRecord> records,
                                      double window_width_m);
std::vector<CountBin> received_counts(const PerSeries& series);

struct ReceiverCoverage {
  std::string receiver_id;
  double d_warn_m = 0.0;
  double farthest_qualifying_m = 0.0;  // |start| of the farthest approach window meeting K
  bool contiguous = true;              // farthest window lies inside the contiguous range
  bool warning_failure = false;
};

struct CoverageReport {
  double d_warn_m = 0.0;  // best receiver
  double farthest_qualifying_m = 0.0;
  long long threshold_used = 0;
  double window_width_m = 0.0;
  bool contiguous = true;
  bool warning_failure = false;
  std::vector<ReceiverCoverage> per_receiver;
};

/// d_warn is the largest d such that every approach window inside (-d, 0]
/// received at least K packets. Windows with no transmissions count as
/// failing.
ReceiverCoverage extract_dwarn(const std::vector<CountBin>& counts, long long threshold,
                               const std::string& receiver_id = {});
CoverageReport extract_coverage(const sim::SimLog& log, double window_width_m,
                                long long threshold);

struct LatencyStats {
  long long count = 0;
  double mean_s = 0.0;
  double p50_s = 0.0;
  double p95_s = 0.0;
  double max_s = 0.0;
  double fraction_below_5ms = 0.0;
  double fraction_below_period = 0.0;
};

/// Statistics over decoded packets only; nearest-rank percentiles. Throws
/// std::invalid_argument when nothing decoded.
LatencyStats latency_stats(std::span<const sim::PacketRecord> records, double tx_period_s = 0.05);

/// Wilson score interval for a binomial proportion.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval wilson_interval(long long successes, long long trials, double z);
inline constexpr double kZ99 = 2.5758293035489004;

struct VehicleGrid {
  std::vector<double> speeds_mph{25.0, 35.0, 45.0, 55.0, 65.0};
  std::vector<safety::RoadCondition> roads{safety::RoadCondition::Dry,
                                           safety::RoadCondition::Wet};
};

struct SafenessRow {
  double vehicle_speed_mph = 0.0;
  safety::RoadCondition road = safety::RoadCondition::Dry;
  double braking_time_s = 0.0;
  bool braking_interpolated = false;
  double time_to_avoid_collision_s = 0.0;
  double protection_time_s = 0.0;
  double psi_zero_distance_m = 0.0;
  double psi_one_distance_m = 0.0;
  bool system_failed = false;
  safety::SafenessCurve curve;
};

struct SafenessReport {
  double warning_distance_m = 0.0;
  double train_speed_mps = 0.0;
  double reaction_time_s = 0.0;
  double system_delay_s = 0.0;
  std::vector<SafenessRow> rows;
  double min_protection_time_s = 0.0;
  double max_protection_time_s = 0.0;
  bool all_failed = false;
};

struct SafenessOptions {
  double reaction_time_s = safety::kDefaultReactionTime;
  double system_delay_s = safety::kDefaultSystemDelay;
  double sweep_step_m = 1.0;
  double sweep_max_m = 0.0;  // 0: max(d_warn, zero-crossing) rounded up
};

SafenessReport safeness_report(double warning_distance_m, double train_speed_mps,
                               const VehicleGrid& grid, const SafenessOptions& options = {},
                               const safety::VehicleBrakingTable& table =
                                   safety::VehicleBrakingTable::standard());
inline SafenessReport safeness_report(const CoverageReport& coverage, double train_speed_mps,
                                      const VehicleGrid& grid,
                                      const SafenessOptions& options = {},
                                      const safety::VehicleBrakingTable& table =
                                          safety::VehicleBrakingTable::standard()) {
  return safeness_report(coverage.d_warn_m, train_speed_mps, grid, options, table);
}

}  // namespace railwarn::analysis
