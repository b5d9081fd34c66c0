#pragma once

// Safety-time budget for a train approaching a level crossing.
//
// All distances are meters, all speeds meters/second unless a name says
// otherwise, all times seconds. The train approaches from negative track
// positions; the crossing sits at 0.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace railwarn::safety {

inline constexpr double kDefaultReactionTime = 3.5;
inline constexpr double kDefaultSystemDelay = 0.005;

enum class RoadCondition { Dry, Wet };

std::string_view to_string(RoadCondition road);
RoadCondition road_from_string(std::string_view text);

struct TrainKinematics {
  double distance_to_crossing = 0.0;  // signed track position
  double speed = 0.0;

  /// Remaining distance d_t on the approach side; 0 once the crossing is reached.
  double approach_distance() const;
};

struct BrakingRow {
  double speed_mph = 0.0;
  double speed_mps = 0.0;
  double braking_distance_dry_m = 0.0;
  double braking_distance_wet_m = 0.0;

  bool operator==(const BrakingRow&) const = default;
};

/// Average vehicle stopping distance by speed. The built-in table holds the
/// five tabulated speeds 25..65 mph with their coarse m/s column verbatim.
class VehicleBrakingTable {
 public:
  explicit VehicleBrakingTable(std::vector<BrakingRow> rows);

  static const VehicleBrakingTable& standard();
  /// CSV with header `speed_mph,speed_mps,db_dry_m,db_wet_m`.
  static VehicleBrakingTable from_csv(std::istream& in);
  static VehicleBrakingTable from_csv_file(const std::string& path);

  const std::vector<BrakingRow>& rows() const { return rows_; }
  double min_speed_mph() const { return rows_.front().speed_mph; }
  double max_speed_mph() const { return rows_.back().speed_mph; }

  bool operator==(const VehicleBrakingTable&) const = default;

 private:
  std::vector<BrakingRow> rows_;
};

struct BrakingTime {
  double seconds = 0.0;
  double distance_m = 0.0;
  double speed_mps = 0.0;
  bool interpolated = false;
};

/// Braking time t_b = d_b / v_v. Between tabulated speeds both d_b and the
/// m/s column are interpolated linearly in mph. Throws std::out_of_range
/// outside the tabulated span.
BrakingTime braking_time(double vehicle_speed_mph, RoadCondition road,
                         const VehicleBrakingTable& table = VehicleBrakingTable::standard());

/// t_t = d_t / v_t. Throws std::domain_error for v_t <= 0 or d_t < 0.
double time_to_crossing(double distance_m, double train_speed);

/// t_TAC = d_warn / v_t. Throws std::domain_error for v_t <= 0 or d_warn < 0.
double time_to_avoid_collision(double warning_distance_m, double train_speed);

/// t_prot = t_TAC - (t_r + t_s + t_b). Negative means the warning came too late.
double protection_time(double time_to_avoid_collision_s, double reaction_time_s,
                       double system_delay_s, double braking_time_s);

struct TimingBudget {
  double reaction_time_s = kDefaultReactionTime;
  double system_delay_s = kDefaultSystemDelay;
  double braking_time_s = 0.0;
  double time_to_avoid_collision_s = 0.0;
  double protection_time_s = 0.0;

  /// Builds a budget whose protection time closes the identity exactly.
  static TimingBudget from(double time_to_avoid_collision_s, double reaction_time_s,
                           double system_delay_s, double braking_time_s);

  double stop_time() const { return reaction_time_s + system_delay_s + braking_time_s; }
};

enum class SafenessCategory { NotSafe, SafeButClose, NoRisk };

std::string_view to_string(SafenessCategory category);

struct SafenessResult {
  std::optional<double> psi;  // empty when t_TAC equals the stop time
  SafenessCategory category = SafenessCategory::NotSafe;
  bool system_failed = false;
};

/// psi = (t_t - S) / (t_TAC - S) with S = t_r + t_s + t_b.
///
/// Classification compares t_t directly against S and t_TAC, which is the
/// same partition as thresholding psi at 0 and 1 but immune to rounding in
/// the division. When t_TAC <= S the warning system has failed and the
/// result is NotSafe whatever psi's sign.
SafenessResult safeness_level(double train_time_s, double time_to_avoid_collision_s,
                              double reaction_time_s, double system_delay_s,
                              double braking_time_s);

/// v_t * (t_r + t_b), plus v_t * t_s when a system delay is given.
double minimum_required_range(double train_speed, double reaction_time_s, double braking_time_s,
                              double system_delay_s = 0.0);

struct SafenessPoint {
  double distance_m = 0.0;
  SafenessResult result;
};

struct SafenessCurveInput {
  double train_speed = 0.0;
  double warning_distance_m = 0.0;
  double vehicle_speed_mph = 25.0;
  RoadCondition road = RoadCondition::Dry;
  double reaction_time_s = kDefaultReactionTime;
  double system_delay_s = kDefaultSystemDelay;
  std::vector<double> distances;  // d_t sweep, meters >= 0
};

struct SafenessCurve {
  std::vector<SafenessPoint> points;
  TimingBudget budget;
  bool braking_interpolated = false;
  double psi_zero_distance_m = 0.0;  // v_t * S
  double psi_one_distance_m = 0.0;   // d_warn
  /// Time between the psi = 0 and psi = 1 crossings; equals t_prot.
  double crossing_gap_s = 0.0;
  bool system_failed = false;
};

SafenessCurve safeness_curve(const SafenessCurveInput& input,
                             const VehicleBrakingTable& table = VehicleBrakingTable::standard());

/// Evenly spaced sweep 0, step, ... up to and including max_distance_m.
std::vector<double> distance_sweep(double max_distance_m, double step_m);

}  // namespace railwarn::safety
