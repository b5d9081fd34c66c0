#include "railwarn/safety.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "csv.hpp"
#include "railwarn/error.hpp"

namespace railwarn::safety {

std::string_view to_string(RoadCondition road) {
  return road == RoadCondition::Dry ? "dry" : "wet";
}

RoadCondition road_from_string(std::string_view text) {
  if (text == "dry") return RoadCondition::Dry;
  if (text == "wet") return RoadCondition::Wet;
  throw ConfigError("unknown road condition '" + std::string(text) + "' (expected dry|wet)");
}

std::string_view to_string(SafenessCategory category) {
  switch (category) {
    case SafenessCategory::NotSafe:
      return "not_safe";
    case SafenessCategory::SafeButClose:
      return "safe_but_close";
    case SafenessCategory::NoRisk:
      return "no_risk";
  }
  return "unknown";
}

double TrainKinematics::approach_distance() const {
  if (!(speed > 0.0)) throw std::domain_error("train speed must be positive");
  return distance_to_crossing <= 0.0 ? -distance_to_crossing : 0.0;
}

VehicleBrakingTable::VehicleBrakingTable(std::vector<BrakingRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("braking table: no rows");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!(r.speed_mph > 0.0) || !(r.speed_mps > 0.0)) {
      throw ConfigError("braking table: speeds must be positive");
    }
    if (r.braking_distance_dry_m < 0.0 || r.braking_distance_wet_m < r.braking_distance_dry_m) {
      throw ConfigError("braking table: need 0 <= dry distance <= wet distance at " +
                        std::to_string(r.speed_mph) + " mph");
    }
    if (i > 0 && !(r.speed_mph > rows_[i - 1].speed_mph && r.speed_mps > rows_[i - 1].speed_mps)) {
      throw ConfigError("braking table: speeds must be strictly increasing");
    }
  }
}

const VehicleBrakingTable& VehicleBrakingTable::standard() {
  static const VehicleBrakingTable table({
      {25.0, 11.11, 25.5, 51.3},
      {35.0, 15.55, 41.4, 82.8},
      {45.0, 20.00, 59.1, 118.2},
      {55.0, 24.44, 79.8, 159.3},
      {65.0, 28.89, 103.2, 206.7},
  });
  return table;
}

VehicleBrakingTable VehicleBrakingTable::from_csv(std::istream& in) {
  const std::string what = "braking table";
  const auto csv =
      detail::read_csv(in, {"speed_mph", "speed_mps", "db_dry_m", "db_wet_m"}, what);
  std::vector<BrakingRow> rows;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& c = csv.rows[i];
    const int ln = csv.line_numbers[i];
    rows.push_back({detail::parse_double(c[0], what, ln), detail::parse_double(c[1], what, ln),
                    detail::parse_double(c[2], what, ln), detail::parse_double(c[3], what, ln)});
  }
  return VehicleBrakingTable(std::move(rows));
}

VehicleBrakingTable VehicleBrakingTable::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("braking table: cannot open '" + path + "'");
  return from_csv(in);
}

BrakingTime braking_time(double vehicle_speed_mph, RoadCondition road,
                         const VehicleBrakingTable& table) {
  const auto& rows = table.rows();
  if (!(vehicle_speed_mph >= table.min_speed_mph() &&
        vehicle_speed_mph <= table.max_speed_mph())) {
    throw std::out_of_range("vehicle speed " + std::to_string(vehicle_speed_mph) +
                            " mph outside braking table span");
  }
  const auto distance = [road](const BrakingRow& r) {
    return road == RoadCondition::Dry ? r.braking_distance_dry_m : r.braking_distance_wet_m;
  };

  auto hi = std::lower_bound(rows.begin(), rows.end(), vehicle_speed_mph,
                             [](const BrakingRow& r, double v) { return r.speed_mph < v; });
  if (hi->speed_mph == vehicle_speed_mph) {
    return {distance(*hi) / hi->speed_mps, distance(*hi), hi->speed_mps, false};
  }
  const auto lo = std::prev(hi);
  const double f = (vehicle_speed_mph - lo->speed_mph) / (hi->speed_mph - lo->speed_mph);
  const double d = distance(*lo) + f * (distance(*hi) - distance(*lo));
  const double v = lo->speed_mps + f * (hi->speed_mps - lo->speed_mps);
  return {d / v, d, v, true};
}

double time_to_crossing(double distance_m, double train_speed) {
  if (!(train_speed > 0.0)) throw std::domain_error("train speed must be positive");
  if (!(distance_m >= 0.0)) throw std::domain_error("distance to crossing must be >= 0");
  return distance_m / train_speed;
}

double time_to_avoid_collision(double warning_distance_m, double train_speed) {
  if (!(train_speed > 0.0)) throw std::domain_error("train speed must be positive");
  if (!(warning_distance_m >= 0.0)) throw std::domain_error("warning distance must be >= 0");
  return warning_distance_m / train_speed;
}

double protection_time(double time_to_avoid_collision_s, double reaction_time_s,
                       double system_delay_s, double braking_time_s) {
  if (reaction_time_s < 0.0 || system_delay_s < 0.0 || braking_time_s < 0.0) {
    throw std::domain_error("reaction, system and braking times must be >= 0");
  }
  return time_to_avoid_collision_s - (reaction_time_s + system_delay_s + braking_time_s);
}

TimingBudget TimingBudget::from(double time_to_avoid_collision_s, double reaction_time_s,
                                double system_delay_s, double braking_time_s) {
  TimingBudget b;
  b.reaction_time_s = reaction_time_s;
  b.system_delay_s = system_delay_s;
  b.braking_time_s = braking_time_s;
  b.time_to_avoid_collision_s = time_to_avoid_collision_s;
  b.protection_time_s = protection_time(time_to_avoid_collision_s, reaction_time_s,
                                        system_delay_s, braking_time_s);
  return b;
}

SafenessResult safeness_level(double train_time_s, double time_to_avoid_collision_s,
                              double reaction_time_s, double system_delay_s,
                              double braking_time_s) {
  if (!(train_time_s >= 0.0) || !(time_to_avoid_collision_s >= 0.0)) {
    throw std::domain_error("t_t and t_TAC must be >= 0");
  }
  if (reaction_time_s < 0.0 || system_delay_s < 0.0 || braking_time_s < 0.0) {
    throw std::domain_error("reaction, system and braking times must be >= 0");
  }
  const double stop = reaction_time_s + system_delay_s + braking_time_s;
  const double denom = time_to_avoid_collision_s - stop;

  SafenessResult r;
  if (denom != 0.0) r.psi = (train_time_s - stop) / denom;
  if (denom <= 0.0) {
    r.system_failed = true;
    r.category = SafenessCategory::NotSafe;
    return r;
  }
  if (train_time_s >= time_to_avoid_collision_s) {
    r.category = SafenessCategory::NoRisk;
  } else if (train_time_s >= stop) {
    r.category = SafenessCategory::SafeButClose;
  } else {
    r.category = SafenessCategory::NotSafe;
  }
  return r;
}

double minimum_required_range(double train_speed, double reaction_time_s, double braking_time_s,
                              double system_delay_s) {
  return train_speed * (reaction_time_s + braking_time_s + system_delay_s);
}

SafenessCurve safeness_curve(const SafenessCurveInput& input, const VehicleBrakingTable& table) {
  if (input.distances.empty()) throw std::invalid_argument("safeness curve: empty sweep");
  const auto [lo, hi] = std::minmax_element(input.distances.begin(), input.distances.end());
  if (*lo < 0.0) throw std::invalid_argument("safeness curve: sweep distances must be >= 0");
  if (*hi < input.warning_distance_m) {
    throw std::invalid_argument("safeness curve: sweep must extend to the warning distance");
  }

  const auto braking = braking_time(input.vehicle_speed_mph, input.road, table);
  const double t_tac = time_to_avoid_collision(input.warning_distance_m, input.train_speed);

  SafenessCurve curve;
  curve.budget =
      TimingBudget::from(t_tac, input.reaction_time_s, input.system_delay_s, braking.seconds);
  curve.braking_interpolated = braking.interpolated;
  curve.psi_zero_distance_m = input.train_speed * curve.budget.stop_time();
  curve.psi_one_distance_m = input.warning_distance_m;
  curve.crossing_gap_s = curve.budget.protection_time_s;
  curve.system_failed = curve.budget.protection_time_s <= 0.0;
  curve.points.reserve(input.distances.size());
  for (double d : input.distances) {
    curve.points.push_back({d, safeness_level(time_to_crossing(d, input.train_speed), t_tac,
                                              input.reaction_time_s, input.system_delay_s,
                                              braking.seconds)});
  }
  return curve;
}

std::vector<double> distance_sweep(double max_distance_m, double step_m) {
  if (!(step_m > 0.0) || !(max_distance_m >= 0.0)) {
    throw std::invalid_argument("distance sweep: need step > 0 and max >= 0");
  }
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor(max_distance_m / step_m + 1e-9));
  out.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(static_cast<double>(i) * step_m);
  if (out.back() < max_distance_m) out.push_back(max_distance_m);
  return out;
}

}  // namespace railwarn::safety
