#include "railwarn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csv.hpp"
#include "railwarn/error.hpp"

namespace railwarn::geometry {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double wrap360(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a = 0.0;
  return a;
}

Vec3 unit(double heading_deg) {
  return {std::cos(heading_deg * kDegToRad), std::sin(heading_deg * kDegToRad), 0.0};
}

// Linear interpolation over a cut, wrapping around 360 degrees for azimuth.
double interpolate_cyclic(const std::vector<PatternSample>& cut, double angle) {
  if (cut.size() == 1) return cut.front().gain_dbi;
  const double a = wrap360(angle);
  auto hi = std::upper_bound(cut.begin(), cut.end(), a,
                             [](double v, const PatternSample& s) { return v < s.angle_deg; });
  const PatternSample& upper = hi == cut.end() ? cut.front() : *hi;
  const PatternSample& lower = hi == cut.begin() ? cut.back() : *std::prev(hi);
  double span = upper.angle_deg - lower.angle_deg;
  double off = a - lower.angle_deg;
  if (span <= 0.0) span += 360.0;
  if (off < 0.0) off += 360.0;
  return lower.gain_dbi + (off / span) * (upper.gain_dbi - lower.gain_dbi);
}

double interpolate_clamped(const std::vector<PatternSample>& cut, double angle) {
  if (angle <= cut.front().angle_deg) return cut.front().gain_dbi;
  if (angle >= cut.back().angle_deg) return cut.back().gain_dbi;
  auto hi = std::upper_bound(cut.begin(), cut.end(), angle,
                             [](double v, const PatternSample& s) { return v < s.angle_deg; });
  const auto lo = std::prev(hi);
  const double f = (angle - lo->angle_deg) / (hi->angle_deg - lo->angle_deg);
  return lo->gain_dbi + f * (hi->gain_dbi - lo->gain_dbi);
}

std::vector<PatternSample> read_cut(std::istream& in, const std::string& what) {
  const auto csv = detail::read_csv(in, {"angle_deg", "gain_dbi"}, what);
  std::vector<PatternSample> cut;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const int ln = csv.line_numbers[i];
    cut.push_back({detail::parse_double(csv.rows[i][0], what, ln),
                   detail::parse_double(csv.rows[i][1], what, ln)});
  }
  return cut;
}

}  // namespace

std::string to_string(ReceiverKind kind) { return kind == ReceiverKind::RSU ? "RSU" : "OBU"; }

ReceiverKind receiver_kind_from_string(const std::string& text) {
  if (text == "RSU" || text == "rsu") return ReceiverKind::RSU;
  if (text == "OBU" || text == "obu") return ReceiverKind::OBU;
  throw ConfigError("unknown receiver kind '" + text + "' (expected RSU|OBU)");
}

void ObstructionSegment::validate() const {
  if (!(d_start_m < d_end_m)) throw ConfigError("obstruction: d_start_m must be < d_end_m");
  if (!(excess_loss_db >= 0.0)) throw ConfigError("obstruction: excess_loss_db must be >= 0");
  if (gaps) {
    if (!(gaps->period_m > 0.0) || !(gaps->gap_width_m >= 0.0) ||
        gaps->gap_width_m > gaps->period_m) {
      throw ConfigError("obstruction: need period > 0 and 0 <= gap width <= period");
    }
  }
}

double ObstructionSegment::excess_loss_at(double train_position_m) const {
  if (train_position_m < d_start_m || train_position_m >= d_end_m) return 0.0;
  if (gaps && gaps->gap_width_m > 0.0) {
    const double phase = std::fmod(train_position_m - d_start_m, gaps->period_m);
    if (phase < gaps->gap_width_m) return 0.0;
  }
  return excess_loss_db;
}

void CrossingScene::validate() const {
  if (std::fmod(std::abs(track_heading_deg - road_heading_deg), 180.0) == 0.0) {
    throw ConfigError("scene: track and road headings must differ (they have to cross)");
  }
  if (!(tx_height_m > 0.0)) throw ConfigError("scene: tx_height_m must be > 0");
  for (const auto& p : receivers) {
    if (!(p.height_m > 0.0)) throw ConfigError("scene: receiver '" + p.id + "' height must be > 0");
  }
  for (std::size_t i = 0; i < receivers.size(); ++i) {
    for (std::size_t j = i + 1; j < receivers.size(); ++j) {
      if (receivers[i].id == receivers[j].id) {
        throw ConfigError("scene: duplicate receiver id '" + receivers[i].id + "'");
      }
    }
  }
  for (const auto& o : obstructions) o.validate();
}

Vec3 CrossingScene::train_position(double train_position_m) const {
  const Vec3 u = unit(track_heading_deg);
  return {train_position_m * u.x, train_position_m * u.y, tx_height_m};
}

Vec3 CrossingScene::receiver_position(const Placement& placement) const {
  const Vec3 u = unit(road_heading_deg);
  return {placement.offset_from_crossing_m * u.x, placement.offset_from_crossing_m * u.y,
          placement.height_m};
}

LinkGeometry link_geometry(double train_position_m, const Placement& placement,
                           const CrossingScene& scene) {
  const Vec3 tx = scene.train_position(train_position_m);
  const Vec3 rx = scene.receiver_position(placement);
  const Vec3 d{rx.x - tx.x, rx.y - tx.y, rx.z - tx.z};
  const double horizontal = std::hypot(d.x, d.y);
  const double range = std::hypot(horizontal, d.z);
  if (range < 1e-9) throw GeometryError("link geometry: transmitter and receiver coincide");

  LinkGeometry g;
  g.range_m = range;
  const double bearing_tx_to_rx = std::atan2(d.y, d.x) * kRadToDeg;
  const double bearing_rx_to_tx = std::atan2(-d.y, -d.x) * kRadToDeg;
  // A purely vertical link has no azimuth; report boresight.
  g.tx_azimuth_deg = horizontal > 0.0 ? wrap360(bearing_tx_to_rx - scene.track_heading_deg) : 0.0;
  g.rx_azimuth_deg =
      horizontal > 0.0 ? wrap360(bearing_rx_to_tx - placement.boresight_heading_deg) : 0.0;
  g.tx_elevation_deg = std::atan2(d.z, horizontal) * kRadToDeg;
  g.rx_elevation_deg = -g.tx_elevation_deg;
  return g;
}

void AntennaPattern::validate() const {
  const auto check_cut = [this](const std::vector<PatternSample>& cut, const char* which,
                                double lo, double hi) {
    if (cut.empty()) throw ConfigError("antenna '" + name + "': empty " + which + " cut");
    for (std::size_t i = 0; i < cut.size(); ++i) {
      if (cut[i].angle_deg < lo || cut[i].angle_deg > hi) {
        throw ConfigError("antenna '" + name + "': " + which + " angle out of range");
      }
      if (i > 0 && !(cut[i].angle_deg > cut[i - 1].angle_deg)) {
        throw ConfigError("antenna '" + name + "': " + which + " angles must be increasing");
      }
      if (cut[i].gain_dbi > peak_gain_dbi + 1e-9) {
        throw ConfigError("antenna '" + name + "': " + which + " gain exceeds peak");
      }
    }
  };
  check_cut(azimuth_cut, "azimuth", 0.0, 360.0 - 1e-12);
  check_cut(elevation_cut, "elevation", -90.0, 90.0);
}

AntennaPattern AntennaPattern::omnidirectional(const std::string& name, double peak_dbi) {
  AntennaPattern p;
  p.name = name;
  p.peak_gain_dbi = peak_dbi;
  p.azimuth_cut = {{0.0, peak_dbi}};
  p.elevation_cut = {{-90.0, peak_dbi}, {90.0, peak_dbi}};
  return p;
}

AntennaPattern AntennaPattern::bidirectional(const std::string& name, double peak_dbi,
                                             double half_power_beamwidth_deg, double floor_dbi) {
  if (!(half_power_beamwidth_deg > 0.0)) {
    throw ConfigError("antenna '" + name + "': beamwidth must be > 0");
  }
  AntennaPattern p;
  p.name = name;
  p.peak_gain_dbi = peak_dbi;
  p.floor_dbi = floor_dbi;
  // Gaussian lobe in dB: -3 dB at half the beamwidth off boresight. The cut
  // itself bottoms out at the floor.
  const auto lobe = [&](double off_deg) {
    const double rel = -12.0 * (off_deg / half_power_beamwidth_deg) *
                       (off_deg / half_power_beamwidth_deg);
    return std::max(peak_dbi + rel, floor_dbi);
  };
  constexpr double step = 0.5;
  for (double a = 0.0; a < 360.0; a += step) {
    const double off = std::min({a, std::abs(a - 180.0), 360.0 - a});
    p.azimuth_cut.push_back({a, lobe(off)});
  }
  for (double e = -90.0; e <= 90.0; e += step) p.elevation_cut.push_back({e, lobe(std::abs(e))});
  return p;
}

AntennaPattern AntennaPattern::builtin(const std::string& name) {
  if (name == "omni12") return omnidirectional(name, 12.0);
  if (name == "omni6") return omnidirectional(name, 6.0);
  if (name == "bidirectional23") return bidirectional(name, 23.0, 10.0, -10.0);
  throw ConfigError("unknown built-in antenna '" + name +
                    "' (expected omni12|omni6|bidirectional23)");
}

AntennaPattern AntennaPattern::from_csv(const std::string& name, std::istream& azimuth,
                                        std::istream& elevation, double floor_dbi) {
  AntennaPattern p;
  p.name = name;
  p.floor_dbi = floor_dbi;
  p.azimuth_cut = read_cut(azimuth, "antenna '" + name + "' azimuth");
  p.elevation_cut = read_cut(elevation, "antenna '" + name + "' elevation");
  if (p.azimuth_cut.empty() || p.elevation_cut.empty()) {
    throw ConfigError("antenna '" + name + "': empty pattern");
  }
  double peak = p.azimuth_cut.front().gain_dbi;
  for (const auto& s : p.azimuth_cut) peak = std::max(peak, s.gain_dbi);
  for (const auto& s : p.elevation_cut) peak = std::max(peak, s.gain_dbi);
  p.peak_gain_dbi = peak;
  p.validate();
  return p;
}

double pattern_gain(const AntennaPattern& pattern, double azimuth_deg, double elevation_deg) {
  if (pattern.azimuth_cut.empty() || pattern.elevation_cut.empty()) {
    throw ConfigError("antenna '" + pattern.name + "': empty pattern");
  }
  const double az = interpolate_cyclic(pattern.azimuth_cut, azimuth_deg);
  const double el = interpolate_clamped(pattern.elevation_cut, elevation_deg);
  const double g = pattern.peak_gain_dbi + (az - pattern.peak_gain_dbi) +
                   (el - pattern.peak_gain_dbi);
  return std::max(g, pattern.floor_dbi);
}

std::vector<GainSample> effective_gain_profile(const CrossingScene& scene,
                                               const AntennaPattern& tx_pattern,
                                               const AntennaPattern& rx_pattern,
                                               const Placement& placement,
                                               const std::vector<double>& train_positions) {
  if (train_positions.empty()) throw std::invalid_argument("gain profile: empty sweep");
  std::vector<GainSample> out;
  out.reserve(train_positions.size());
  for (double d : train_positions) {
    const auto g = link_geometry(d, placement, scene);
    out.push_back({d, pattern_gain(tx_pattern, g.tx_azimuth_deg, g.tx_elevation_deg) +
                          pattern_gain(rx_pattern, g.rx_azimuth_deg, g.rx_elevation_deg)});
  }
  return out;
}

}  // namespace railwarn::geometry
