#include "railwarn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace railwarn::analysis {

namespace {

long long window_index(double position_m, double width) {
  return static_cast<long long>(std::floor(position_m / width));
}

void check_width(double width) {
  if (!(width > 0.0)) throw std::invalid_argument("window width must be > 0");
}

}  // namespace

PerSeries bin_per(std::span<const sim::PacketRecord> records, double window_width_m) {
  check_width(window_width_m);
  if (records.empty()) throw std::invalid_argument("empty log");
  std::map<long long, std::pair<long long, long long>> tally;
  for (const auto& r : records) {
    auto& [tx, rx] = tally[window_index(r.train_position_m, window_width_m)];
    ++tx;
    if (r.decoded) ++rx;
  }
  PerSeries s;
  s.window_width_m = window_width_m;
  for (const auto& [k, c] : tally) {
    PerBin b;
    b.d_start_m = static_cast<double>(k) * window_width_m;
    b.d_end_m = b.d_start_m + window_width_m;
    b.d_center_m = b.d_start_m + 0.5 * window_width_m;
    b.transmitted = c.first;
    b.received = c.second;
    b.per = 1.0 - static_cast<double>(c.second) / static_cast<double>(c.first);
    s.bins.push_back(b);
  }
  return s;
}

std::vector<CountBin> received_counts(const PerSeries& series) {
  std::vector<CountBin> out;
  out.reserve(series.bins.size());
  for (const auto& b : series.bins) out.push_back({b.d_start_m, b.d_end_m, b.d_center_m, b.received});
  return out;
}

std::vector<CountBin> received_counts(std::span<const sim::PacketRecord> records,
                                      double window_width_m) {
  return received_counts(bin_per(records, window_width_m));
}

ReceiverCoverage extract_dwarn(const std::vector<CountBin>& counts, long long threshold,
                               const std::string& receiver_id) {
  ReceiverCoverage cov;
  cov.receiver_id = receiver_id;
  if (threshold < 1) throw std::invalid_argument("coverage threshold must be >= 1");
  if (counts.empty()) {
    cov.warning_failure = true;
    return cov;
  }
  const double width = counts.front().d_end_m - counts.front().d_start_m;
  std::map<long long, long long> by_index;
  for (const auto& c : counts) {
    by_index[static_cast<long long>(std::llround(c.d_start_m / width))] = c.received;
  }
  const auto meets = [&](long long k) {
    const auto it = by_index.find(k);
    return it != by_index.end() && it->second >= threshold;
  };

  long long k = -1;
  while (meets(k)) --k;
  cov.d_warn_m = static_cast<double>(-(k + 1)) * width;

  for (const auto& [idx, received] : by_index) {
    if (idx <= -1 && received >= threshold) {
      cov.farthest_qualifying_m = static_cast<double>(-idx) * width;
      break;  // map is ascending: the first qualifying index is the farthest
    }
  }
  cov.contiguous = cov.farthest_qualifying_m == cov.d_warn_m;
  cov.warning_failure = cov.d_warn_m == 0.0;
  return cov;
}

CoverageReport extract_coverage(const sim::SimLog& log, double window_width_m,
                                long long threshold) {
  CoverageReport rep;
  rep.threshold_used = threshold;
  rep.window_width_m = window_width_m;
  rep.warning_failure = true;
  bool any_records = false;
  for (const auto& r : log.receivers) {
    if (r.records.empty()) continue;
    any_records = true;
    auto cov = extract_dwarn(received_counts(r.records, window_width_m), threshold, r.receiver_id);
    rep.d_warn_m = std::max(rep.d_warn_m, cov.d_warn_m);
    rep.farthest_qualifying_m = std::max(rep.farthest_qualifying_m, cov.farthest_qualifying_m);
    rep.per_receiver.push_back(std::move(cov));
  }
  if (!any_records) throw std::invalid_argument("empty log");
  rep.warning_failure = rep.d_warn_m == 0.0;
  rep.contiguous = rep.farthest_qualifying_m == rep.d_warn_m;
  return rep;
}

LatencyStats latency_stats(std::span<const sim::PacketRecord> records, double tx_period_s) {
  std::vector<double> lat;
  for (const auto& r : records) {
    if (r.decoded && r.latency_s) lat.push_back(*r.latency_s);
  }
  if (lat.empty()) throw std::invalid_argument("latency stats: no decoded packets");
  std::sort(lat.begin(), lat.end());
  const auto n = static_cast<long long>(lat.size());
  const auto rank = [&](double q) {
    const auto r = static_cast<long long>(std::ceil(q * static_cast<double>(n)));
    return lat[static_cast<std::size_t>(std::clamp<long long>(r, 1, n) - 1)];
  };
  LatencyStats s;
  s.count = n;
  double sum = 0.0;
  long long below5 = 0;
  long long below_period = 0;
  for (double x : lat) {
    sum += x;
    if (x < 0.005) ++below5;
    if (x < tx_period_s) ++below_period;
  }
  s.mean_s = sum / static_cast<double>(n);
  s.p50_s = rank(0.50);
  s.p95_s = rank(0.95);
  s.max_s = lat.back();
  s.fraction_below_5ms = static_cast<double>(below5) / static_cast<double>(n);
  s.fraction_below_period = static_cast<double>(below_period) / static_cast<double>(n);
  return s;
}

Interval wilson_interval(long long successes, long long trials, double z) {
  if (trials <= 0 || successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson interval: need 0 <= successes <= trials, trials > 0");
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  // Rounding leaves centre - half a few ulps off zero at the endpoints.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

SafenessReport safeness_report(double warning_distance_m, double train_speed_mps,
                               const VehicleGrid& grid, const SafenessOptions& options,
                               const safety::VehicleBrakingTable& table) {
  if (grid.speeds_mph.empty() || grid.roads.empty()) {
    throw std::invalid_argument("safeness report: empty vehicle grid");
  }
  SafenessReport rep;
  rep.warning_distance_m = warning_distance_m;
  rep.train_speed_mps = train_speed_mps;
  rep.reaction_time_s = options.reaction_time_s;
  rep.system_delay_s = options.system_delay_s;
  rep.all_failed = true;

  bool first = true;
  for (double vmph : grid.speeds_mph) {
    for (auto road : grid.roads) {
      safety::SafenessCurveInput in;
      in.train_speed = train_speed_mps;
      in.warning_distance_m = warning_distance_m;
      in.vehicle_speed_mph = vmph;
      in.road = road;
      in.reaction_time_s = options.reaction_time_s;
      in.system_delay_s = options.system_delay_s;
      const double tb = safety::braking_time(vmph, road, table).seconds;
      const double zero =
          train_speed_mps * (options.reaction_time_s + options.system_delay_s + tb);
      const double max_d = options.sweep_max_m > 0.0
                               ? std::max(options.sweep_max_m, warning_distance_m)
                               : std::ceil(std::max(warning_distance_m, zero) * 1.25);
      in.distances = safety::distance_sweep(max_d, options.sweep_step_m);

      SafenessRow row;
      row.vehicle_speed_mph = vmph;
      row.road = road;
      row.curve = safety::safeness_curve(in, table);
      row.braking_time_s = row.curve.budget.braking_time_s;
      row.braking_interpolated = row.curve.braking_interpolated;
      row.time_to_avoid_collision_s = row.curve.budget.time_to_avoid_collision_s;
      row.protection_time_s = row.curve.budget.protection_time_s;
      row.psi_zero_distance_m = row.curve.psi_zero_distance_m;
      row.psi_one_distance_m = row.curve.psi_one_distance_m;
      row.system_failed = row.curve.system_failed;
      rep.all_failed = rep.all_failed && row.system_failed;
      if (first) {
        rep.min_protection_time_s = rep.max_protection_time_s = row.protection_time_s;
        first = false;
      } else {
        rep.min_protection_time_s = std::min(rep.min_protection_time_s, row.protection_time_s);
        rep.max_protection_time_s = std::max(rep.max_protection_time_s, row.protection_time_s);
      }
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

}  // namespace railwarn::analysis
