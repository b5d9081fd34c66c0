#pragma once

// Flat-earth crossing geometry and principal-plane antenna patterns.
//
// The track and the road are straight lines through the crossing at the
// origin. Headings are degrees counter-clockwise from the +x axis. A train
// position is a signed distance along the track heading, negative on the
// approach side.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace railwarn::geometry {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

enum class ReceiverKind { RSU, OBU };

std::string to_string(ReceiverKind kind);
ReceiverKind receiver_kind_from_string(const std::string& text);

/// Periodic line-of-sight windows inside an obstructed stretch, e.g. the
/// spacing between parked cargo cars.
struct GapPattern {
  double gap_width_m = 0.0;
  double period_m = 0.0;

  bool operator==(const GapPattern&) const = default;
};

/// Train positions [d_start_m, d_end_m) over which the path is blocked.
struct ObstructionSegment {
  double d_start_m = 0.0;
  double d_end_m = 0.0;
  double excess_loss_db = 0.0;
  std::optional<GapPattern> gaps;

  void validate() const;
  /// Excess loss at a train position; zero outside the segment or in a gap.
  double excess_loss_at(double train_position_m) const;

  bool operator==(const ObstructionSegment&) const = default;
};

/// A receiver site. It sits on the road at a signed offset from the crossing;
/// for a road perpendicular to the track this offset is the lateral distance
/// from the track.
struct Placement {
  std::string id = "rsu";
  ReceiverKind kind = ReceiverKind::RSU;
  double offset_from_crossing_m = 5.0;
  double height_m = 3.0;
  /// Receive-antenna boresight heading; only matters for directional patterns.
  double boresight_heading_deg = 0.0;

  bool operator==(const Placement&) const = default;
};

struct CrossingScene {
  double track_heading_deg = 0.0;
  double road_heading_deg = 90.0;
  double tx_height_m = 4.0;
  std::vector<Placement> receivers{Placement{}};
  std::vector<ObstructionSegment> obstructions;

  void validate() const;
  Vec3 train_position(double train_position_m) const;
  Vec3 receiver_position(const Placement& placement) const;

  bool operator==(const CrossingScene&) const = default;
};

struct LinkGeometry {
  double range_m = 0.0;
  double tx_azimuth_deg = 0.0;  // [0, 360) relative to the track axis
  double tx_elevation_deg = 0.0;
  double rx_azimuth_deg = 0.0;  // [0, 360) relative to the receiver boresight
  double rx_elevation_deg = 0.0;
};

/// Slant range and bearings at both antennas. Throws GeometryError when the
/// two antennas coincide.
LinkGeometry link_geometry(double train_position_m, const Placement& placement,
                           const CrossingScene& scene);

struct PatternSample {
  double angle_deg = 0.0;
  double gain_dbi = 0.0;

  bool operator==(const PatternSample&) const = default;
};

/// Separable antenna pattern reconstructed from an azimuth cut and an
/// elevation cut: gain(az, el) = peak + (az_cut(az) - peak) + (el_cut(el) - peak),
/// linearly interpolated and clamped below at `floor_dbi`.
struct AntennaPattern {
  std::string name;
  std::vector<PatternSample> azimuth_cut;    // angles within [0, 360)
  std::vector<PatternSample> elevation_cut;  // angles within [-90, 90]
  double peak_gain_dbi = 0.0;
  double floor_dbi = -10.0;

  void validate() const;

  /// Flat pattern at `peak_dbi` in both cuts.
  static AntennaPattern omnidirectional(const std::string& name, double peak_dbi);
  /// Two panels pointing fore and aft (0 and 180 degrees azimuth) with a
  /// Gaussian main lobe of the given half-power beamwidth in both planes.
  static AntennaPattern bidirectional(const std::string& name, double peak_dbi,
                                      double half_power_beamwidth_deg = 10.0,
                                      double floor_dbi = -10.0);
  /// Built-in patterns: "omni12", "omni6", "bidirectional23".
  static AntennaPattern builtin(const std::string& name);

  /// Loads cuts from CSV files with header `angle_deg,gain_dbi`. The peak is
  /// the largest tabulated gain.
  static AntennaPattern from_csv(const std::string& name, std::istream& azimuth,
                                 std::istream& elevation, double floor_dbi = -10.0);

  bool operator==(const AntennaPattern&) const = default;
};

double pattern_gain(const AntennaPattern& pattern, double azimuth_deg, double elevation_deg);

struct GainSample {
  double train_position_m = 0.0;
  double combined_gain_dbi = 0.0;
};

/// Transmit plus receive gain along a sweep of train positions, assuming an
/// unobstructed path.
std::vector<GainSample> effective_gain_profile(const CrossingScene& scene,
                                               const AntennaPattern& tx_pattern,
                                               const AntennaPattern& rx_pattern,
                                               const Placement& placement,
                                               const std::vector<double>& train_positions);

}  // namespace railwarn::geometry
