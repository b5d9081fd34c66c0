#include "railwarn/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "railwarn/error.hpp"
#include "railwarn/rng.hpp"
#include "railwarn/units.hpp"

namespace railwarn::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tracks which keys of a config object were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return number(key);
  }
  double number(const std::string& key) {
    require(key);
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
    return v.get<double>();
  }
  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
    return v.get<long long>();
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) {
      throw ConfigError(key_path(key) + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return string(key);
  }
  std::string string(const std::string& key) {
    require(key);
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string");
    return v.get<std::string>();
  }

  void require(const std::string& key) const {
    if (!has(key)) throw ConfigError(key_path(key) + ": required key missing");
  }

  Section child(const std::string& key) {
    static const json empty = json::object();
    if (!has(key)) return Section(empty, key_path(key));
    return Section(raw(key), key_path(key));
  }

  void finish() const {
    for (const auto& [k, v] : node_.items()) {
      if (!used_.count(k)) throw ConfigError(key_path(k) + ": unknown key");
    }
  }

  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

std::string resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<geometry::PatternSample> samples_from_json(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError(path + ": expected an array of [angle_deg, gain_dbi]");
  std::vector<geometry::PatternSample> out;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw ConfigError(path + ": expected [angle_deg, gain_dbi] pairs");
    }
    out.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return out;
}

std::vector<geometry::PatternSample> read_cut_file(const std::string& path,
                                                   const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what + ": cannot open '" + path + "'");
  const auto csv = detail::read_csv(in, {"angle_deg", "gain_dbi"}, what);
  std::vector<geometry::PatternSample> out;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const int ln = csv.line_numbers[i];
    out.push_back({detail::parse_double(csv.rows[i][0], what, ln),
                   detail::parse_double(csv.rows[i][1], what, ln)});
  }
  return out;
}

geometry::AntennaPattern antenna_from_json(Section& parent, const std::string& key,
                                           const std::string& fallback,
                                           const std::string& base_dir) {
  if (!parent.has(key)) return geometry::AntennaPattern::builtin(fallback);
  const json& node = parent.raw(key);
  const std::string path = parent.key_path(key);
  if (node.is_string()) {
    try {
      return geometry::AntennaPattern::builtin(node.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  Section s(node, path);
  geometry::AntennaPattern p;
  p.name = s.string("name", key);
  p.floor_dbi = s.number("floor_dbi", -10.0);
  const auto cut = [&](const std::string& inline_key, const std::string& file_key) {
    if (s.has(inline_key) == s.has(file_key)) {
      throw ConfigError(path + ": exactly one of " + inline_key + " or " + file_key + " required");
    }
    if (s.has(inline_key)) return samples_from_json(s.raw(inline_key), s.key_path(inline_key));
    return read_cut_file(resolve(base_dir, s.string(file_key)), s.key_path(file_key));
  };
  p.azimuth_cut = cut("azimuth", "azimuth_csv");
  p.elevation_cut = cut("elevation", "elevation_csv");
  if (s.has("peak_dbi")) {
    p.peak_gain_dbi = s.number("peak_dbi");
  } else {
    double peak = -1e300;
    for (const auto& c : p.azimuth_cut) peak = std::max(peak, c.gain_dbi);
    for (const auto& c : p.elevation_cut) peak = std::max(peak, c.gain_dbi);
    p.peak_gain_dbi = peak;
  }
  s.finish();
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return p;
}

json antenna_to_json(const geometry::AntennaPattern& p) {
  try {
    if (geometry::AntennaPattern::builtin(p.name) == p) return p.name;
  } catch (const ConfigError&) {
  }
  json az = json::array();
  for (const auto& s : p.azimuth_cut) az.push_back({s.angle_deg, s.gain_dbi});
  json el = json::array();
  for (const auto& s : p.elevation_cut) el.push_back({s.angle_deg, s.gain_dbi});
  return {{"name", p.name},         {"peak_dbi", p.peak_gain_dbi}, {"floor_dbi", p.floor_dbi},
          {"azimuth", az},          {"elevation", el}};
}

// Rewraps a validation failure so the message leads with the section name.
template <typename F>
void validated(const std::string& section, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(section, 0) == 0) throw;
    throw ConfigError(section + ": " + msg);
  }
}

}  // namespace

json scenario_to_json(const sim::Scenario& s) {
  json doc;
  doc["version"] = s.version;
  doc["seed"] = s.seed;

  json receivers = json::array();
  for (const auto& r : s.scene.receivers) {
    receivers.push_back({{"id", r.id},
                         {"kind", geometry::to_string(r.kind)},
                         {"offset_from_crossing_m", r.offset_from_crossing_m},
                         {"height_m", r.height_m},
                         {"boresight_heading_deg", r.boresight_heading_deg}});
  }
  json obstructions = json::array();
  for (const auto& o : s.scene.obstructions) {
    json j = {{"d_start_m", o.d_start_m},
              {"d_end_m", o.d_end_m},
              {"excess_loss_db", o.excess_loss_db}};
    if (o.gaps) {
      j["gap_width_m"] = o.gaps->gap_width_m;
      j["gap_period_m"] = o.gaps->period_m;
    }
    obstructions.push_back(j);
  }
  doc["scene"] = {{"track_heading_deg", s.scene.track_heading_deg},
                  {"road_heading_deg", s.scene.road_heading_deg},
                  {"tx_height_m", s.scene.tx_height_m},
                  {"receivers", receivers},
                  {"obstructions", obstructions}};

  doc["radio"] = {{"center_frequency_hz", s.radio.center_frequency_hz},
                  {"channel_number", s.radio.channel_number},
                  {"tx_power_dbm", s.radio.tx_power_dbm},
                  {"modulation", link::to_string(s.radio.modulation)},
                  {"packet_size_bytes", s.radio.packet_size_bytes},
                  {"tx_period_ms", s.radio.tx_period_ms}};

  doc["antennas"] = {{"tx", antenna_to_json(s.tx_antenna)}, {"rx", antenna_to_json(s.rx_antenna)}};

  if (const auto* emp = std::get_if<link::EmpiricalLink>(&s.channel)) {
    json bins = json::array();
    for (const auto& b : emp->profile.bins) bins.push_back({b.d_start_m, b.d_end_m, b.per});
    doc["channel"] = {
        {"mode", "empirical"},
        {"per_bins", bins},
        {"out_of_profile",
         emp->out_of_profile == link::OutOfProfilePolicy::Error ? "error" : "zero"}};
  } else {
    const auto& c = std::get<link::SyntheticChannel>(s.channel);
    doc["channel"] = {{"mode", "synthetic"},
                      {"path_loss_exponent", c.path_loss_exponent},
                      {"reference_loss_db", c.reference_loss_db},
                      {"shadowing_sigma_db", c.shadowing_sigma_db},
                      {"noise_floor_dbm", c.noise_floor_dbm},
                      {"qpsk_threshold_db", c.qpsk_threshold_db},
                      {"qam16_threshold_db", c.qam16_threshold_db},
                      {"transition_width_db", c.transition_width_db}};
  }

  doc["latency"] = {{"processing_base_ms", s.latency.processing_base_ms},
                    {"processing_jitter_ms", s.latency.processing_jitter_ms},
                    {"relay_hops", s.latency.relay_hops}};
  doc["train"] = {{"id", s.train.train_id},
                  {"speed_mps", s.train.speed_mps},
                  {"start_m", s.train.start_m},
                  {"end_m", s.train.end_m}};
  doc["policy"] = {{"reliability_threshold", s.policy.reliability_threshold},
                   {"trigger_distance_m", s.policy.trigger_distance_m},
                   {"window_s", s.policy.window_s}};
  doc["analysis"] = {{"window_m", s.analysis.window_m},
                     {"threshold", s.analysis.threshold},
                     {"reaction_time_s", s.analysis.reaction_time_s},
                     {"system_delay_s", s.analysis.system_delay_s},
                     {"min_range_includes_system_delay", s.analysis.min_range_includes_system_delay}};
  return doc;
}

sim::Scenario scenario_from_json(const json& doc, const std::string& base_dir) {
  sim::Scenario s;
  Section root(doc, "");
  s.version = static_cast<int>(root.integer("version", 1));
  if (s.version != 1) throw ConfigError("version: unsupported value " + std::to_string(s.version));
  s.seed = root.unsigned_integer("seed", s.seed);

  {
    auto sc = root.child("scene");
    s.scene.track_heading_deg = sc.number("track_heading_deg", s.scene.track_heading_deg);
    s.scene.road_heading_deg = sc.number("road_heading_deg", s.scene.road_heading_deg);
    s.scene.tx_height_m = sc.number("tx_height_m", s.scene.tx_height_m);
    if (sc.has("receivers")) {
      const json& arr = sc.raw("receivers");
      if (!arr.is_array()) throw ConfigError("scene.receivers: expected an array");
      s.scene.receivers.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section r(arr[i], "scene.receivers[" + std::to_string(i) + "]");
        geometry::Placement p;
        p.id = r.string("id");
        p.kind = geometry::receiver_kind_from_string(r.string("kind", "RSU"));
        p.offset_from_crossing_m = r.number("offset_from_crossing_m", p.offset_from_crossing_m);
        p.height_m = r.number("height_m", p.kind == geometry::ReceiverKind::RSU ? 3.0 : 1.7);
        p.boresight_heading_deg = r.number("boresight_heading_deg", 0.0);
        r.finish();
        s.scene.receivers.push_back(p);
      }
    }
    if (sc.has("obstructions")) {
      const json& arr = sc.raw("obstructions");
      if (!arr.is_array()) throw ConfigError("scene.obstructions: expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section o(arr[i], "scene.obstructions[" + std::to_string(i) + "]");
        geometry::ObstructionSegment seg;
        seg.d_start_m = o.number("d_start_m");
        seg.d_end_m = o.number("d_end_m");
        seg.excess_loss_db = o.number("excess_loss_db");
        if (o.has("gap_width_m") || o.has("gap_period_m")) {
          seg.gaps = geometry::GapPattern{o.number("gap_width_m"), o.number("gap_period_m")};
        }
        o.finish();
        s.scene.obstructions.push_back(seg);
      }
    }
    sc.finish();
    validated("scene", [&] { s.scene.validate(); });
  }

  {
    auto r = root.child("radio");
    s.radio.center_frequency_hz = r.number("center_frequency_hz", s.radio.center_frequency_hz);
    s.radio.channel_number = static_cast<int>(r.integer("channel_number", s.radio.channel_number));
    s.radio.tx_power_dbm = r.number("tx_power_dbm", s.radio.tx_power_dbm);
    s.radio.modulation = link::modulation_from_string(r.string("modulation", "QPSK"));
    s.radio.packet_size_bytes =
        static_cast<int>(r.integer("packet_size_bytes", s.radio.packet_size_bytes));
    s.radio.tx_period_ms = r.number("tx_period_ms", s.radio.tx_period_ms);
    r.finish();
    s.radio.validate();
  }

  {
    auto a = root.child("antennas");
    s.tx_antenna = antenna_from_json(a, "tx", "omni12", base_dir);
    s.rx_antenna = antenna_from_json(a, "rx", "omni6", base_dir);
    a.finish();
  }

  {
    auto c = root.child("channel");
    const std::string mode = c.string("mode", "synthetic");
    if (mode == "empirical") {
      link::EmpiricalLink emp;
      if (c.has("per_table") == c.has("per_bins")) {
        throw ConfigError("channel.per_table: empirical mode requires a PER table "
                          "(per_table path or inline per_bins)");
      }
      if (c.has("per_table")) {
        emp.profile = link::PerProfile::from_csv_file(resolve(base_dir, c.string("per_table")));
      } else {
        const json& arr = c.raw("per_bins");
        if (!arr.is_array()) throw ConfigError("channel.per_bins: expected an array");
        for (const auto& b : arr) {
          if (!b.is_array() || b.size() != 3 || !b[0].is_number() || !b[1].is_number() ||
              !b[2].is_number()) {
            throw ConfigError("channel.per_bins: expected [d_start_m, d_end_m, per] triples");
          }
          emp.profile.bins.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>()});
        }
      }
      const std::string policy = c.string("out_of_profile", "error");
      if (policy == "error") {
        emp.out_of_profile = link::OutOfProfilePolicy::Error;
      } else if (policy == "zero") {
        emp.out_of_profile = link::OutOfProfilePolicy::ZeroSuccess;
      } else {
        throw ConfigError("channel.out_of_profile: expected error|zero");
      }
      validated("channel", [&] { emp.profile.validate(); });
      s.channel = std::move(emp);
    } else if (mode == "synthetic") {
      link::SyntheticChannel ch;
      ch.path_loss_exponent = c.number("path_loss_exponent", ch.path_loss_exponent);
      ch.reference_loss_db = c.number("reference_loss_db", ch.reference_loss_db);
      ch.shadowing_sigma_db = c.number("shadowing_sigma_db", ch.shadowing_sigma_db);
      ch.noise_floor_dbm = c.number("noise_floor_dbm", ch.noise_floor_dbm);
      ch.qpsk_threshold_db = c.number("qpsk_threshold_db", ch.qpsk_threshold_db);
      ch.qam16_threshold_db = c.number("qam16_threshold_db", ch.qam16_threshold_db);
      ch.transition_width_db = c.number("transition_width_db", ch.transition_width_db);
      ch.validate();
      s.channel = ch;
    } else {
      throw ConfigError("channel.mode: expected empirical|synthetic, got '" + mode + "'");
    }
    c.finish();
  }

  {
    auto l = root.child("latency");
    s.latency.processing_base_ms = l.number("processing_base_ms", s.latency.processing_base_ms);
    s.latency.processing_jitter_ms =
        l.number("processing_jitter_ms", s.latency.processing_jitter_ms);
    s.latency.relay_hops = static_cast<int>(l.integer("relay_hops", s.latency.relay_hops));
    l.finish();
    s.latency.validate();
  }

  {
    root.require("train");
    auto t = root.child("train");
    s.train.train_id = t.unsigned_integer("id", s.train.train_id);
    if (t.has("speed_mph") == t.has("speed_mps")) {
      throw ConfigError("train.speed_mph: exactly one of speed_mph or speed_mps required");
    }
    s.train.speed_mps = t.has("speed_mph") ? mph_to_mps(t.number("speed_mph"))
                                           : t.number("speed_mps");
    if (!(s.train.speed_mps > 0.0)) throw ConfigError("train.speed: must be > 0");
    s.train.start_m = t.number("start_m", s.train.start_m);
    s.train.end_m = t.number("end_m", s.train.end_m);
    t.finish();
  }

  {
    auto p = root.child("policy");
    s.policy.reliability_threshold =
        static_cast<int>(p.integer("reliability_threshold", s.policy.reliability_threshold));
    s.policy.trigger_distance_m = p.number("trigger_distance_m", s.policy.trigger_distance_m);
    s.policy.window_s = p.number("window_s", s.policy.window_s);
    p.finish();
  }

  {
    auto a = root.child("analysis");
    s.analysis.window_m = a.number("window_m", s.analysis.window_m);
    s.analysis.threshold = static_cast<int>(a.integer("threshold", s.analysis.threshold));
    s.analysis.reaction_time_s = a.number("reaction_time_s", s.analysis.reaction_time_s);
    s.analysis.system_delay_s = a.number("system_delay_s", s.analysis.system_delay_s);
    s.analysis.min_range_includes_system_delay =
        a.boolean("min_range_includes_system_delay", s.analysis.min_range_includes_system_delay);
    a.finish();
  }

  root.finish();
  s.validate();
  return s;
}

sim::Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col));
  }
  return scenario_from_json(doc, base_dir);
}

sim::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = fs::path(path).parent_path();
  return parse_scenario(ss.str(), dir.empty() ? "." : dir.string());
}

std::string write_scenario(const sim::Scenario& scenario) {
  return scenario_to_json(scenario).dump(2) + "\n";
}

std::string scenario_digest(const sim::Scenario& scenario) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(scenario_to_json(scenario).dump()));
  return std::string("fnv1a64:") + buf;
}

void write_log(std::ostream& out, const sim::SimLog& log) {
  json receivers = json::array();
  for (const auto& r : log.receivers) {
    receivers.push_back(
        {{"id", r.receiver_id}, {"kind", geometry::to_string(r.kind)}, {"reordered", r.reordered}});
  }
  const json header = {{"type", "header"},
                       {"format", "railwarn-log"},
                       {"version", 1},
                       {"scenario_digest", log.scenario_digest},
                       {"seed", log.seed},
                       {"tx_period_s", log.tx_period_s},
                       {"train_speed_mps", log.train_speed_mps},
                       {"pass_duration_s", log.pass_duration_s},
                       {"packets_transmitted", log.packets_transmitted},
                       {"receivers", receivers}};
  out << header.dump() << '\n';
  for (const auto& r : log.receivers) {
    for (const auto& p : r.records) {
      json j = {{"type", "packet"},
                {"receiver", p.receiver_id},
                {"seq", p.seq},
                {"tx_time_s", p.tx_time_s},
                {"train_position_m", p.train_position_m},
                {"decoded", p.decoded}};
      if (p.rx_time_s) j["rx_time_s"] = *p.rx_time_s;
      if (p.latency_s) j["latency_s"] = *p.latency_s;
      out << j.dump() << '\n';
    }
  }
  for (const auto& w : log.warnings) {
    const auto& e = w.event;
    const json j = {{"type", "warning"},
                    {"receiver", e.receiver_id},
                    {"kind", geometry::to_string(e.source)},
                    {"mode", protocol::to_string(e.mode)},
                    {"trigger_time_s", e.trigger_time_s},
                    {"train_position_m", e.train_position_m},
                    {"packets_seen", e.packets_seen},
                    {"delivery_time_s", w.delivery_time_s}};
    out << j.dump() << '\n';
  }
}

std::string log_to_string(const sim::SimLog& log) {
  std::ostringstream ss;
  write_log(ss, log);
  return ss.str();
}

sim::SimLog read_log(std::istream& in) {
  sim::SimLog log;
  std::map<std::string, std::size_t> index;
  const auto receiver = [&](const std::string& id) -> sim::ReceiverLog& {
    auto it = index.find(id);
    if (it == index.end()) {
      it = index.emplace(id, log.receivers.size()).first;
      log.receivers.push_back({});
      log.receivers.back().receiver_id = id;
    }
    return log.receivers[it->second];
  };

  std::string line;
  int line_no = 0;
  std::size_t packets = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        log.scenario_digest = j.at("scenario_digest").get<std::string>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.tx_period_s = j.at("tx_period_s").get<double>();
        log.train_speed_mps = j.at("train_speed_mps").get<double>();
        log.pass_duration_s = j.at("pass_duration_s").get<double>();
        log.packets_transmitted = j.at("packets_transmitted").get<std::uint64_t>();
        for (const auto& r : j.at("receivers")) {
          auto& rl = receiver(r.at("id").get<std::string>());
          rl.kind = geometry::receiver_kind_from_string(r.at("kind").get<std::string>());
          rl.reordered = r.at("reordered").get<int>();
        }
      } else if (type == "packet") {
        sim::PacketRecord p;
        p.receiver_id = j.at("receiver").get<std::string>();
        p.seq = j.at("seq").get<std::uint32_t>();
        p.tx_time_s = j.at("tx_time_s").get<double>();
        p.train_position_m = j.at("train_position_m").get<double>();
        p.decoded = j.at("decoded").get<bool>();
        if (j.contains("rx_time_s")) p.rx_time_s = j["rx_time_s"].get<double>();
        if (j.contains("latency_s")) p.latency_s = j["latency_s"].get<double>();
        receiver(p.receiver_id).records.push_back(std::move(p));
        ++packets;
      } else if (type == "warning") {
        sim::LoggedWarning w;
        w.event.receiver_id = j.at("receiver").get<std::string>();
        w.event.source = geometry::receiver_kind_from_string(j.at("kind").get<std::string>());
        w.event.mode = j.at("mode").get<std::string>() == "direct" ? protocol::WarningMode::Direct
                                                                  : protocol::WarningMode::Indirect;
        w.event.trigger_time_s = j.at("trigger_time_s").get<double>();
        w.event.train_position_m = j.at("train_position_m").get<double>();
        w.event.packets_seen = j.at("packets_seen").get<int>();
        w.delivery_time_s = j.at("delivery_time_s").get<double>();
        log.warnings.push_back(std::move(w));
      } else {
        throw ConfigError("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("log line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (packets == 0) throw std::invalid_argument("empty log");
  return log;
}

sim::SimLog read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open log '" + path + "'");
  return read_log(in);
}

sim::SimLog read_field_log(std::istream& in, const std::string& default_receiver) {
  const std::string what = "field log";
  auto csv = detail::read_csv(in, {}, what);
  const std::vector<std::string> base = {"seq", "tx_time_s", "train_position_m", "decoded",
                                         "rx_time_s"};
  auto with_id = base;
  with_id.push_back("receiver_id");
  if (csv.header != base && csv.header != with_id) {
    throw ConfigError(what + ": expected header 'seq,tx_time_s,train_position_m,decoded,rx_time_s"
                             "[,receiver_id]'");
  }
  const bool has_id = csv.header.size() == with_id.size();

  sim::SimLog log;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& c = csv.rows[i];
    const int ln = csv.line_numbers[i];
    sim::PacketRecord p;
    p.seq = static_cast<std::uint32_t>(detail::parse_int(c[0], what, ln));
    p.tx_time_s = detail::parse_double(c[1], what, ln);
    p.train_position_m = detail::parse_double(c[2], what, ln);
    if (c[3] == "1" || c[3] == "true") {
      p.decoded = true;
    } else if (c[3] == "0" || c[3] == "false") {
      p.decoded = false;
    } else {
      throw ConfigError(what + ": line " + std::to_string(ln) + ": decoded must be 0|1");
    }
    if (p.decoded) {
      p.rx_time_s = detail::parse_double(c[4], what, ln);
      if (*p.rx_time_s < p.tx_time_s) {
        throw ConfigError(what + ": line " + std::to_string(ln) + ": rx_time_s before tx_time_s");
      }
      p.latency_s = *p.rx_time_s - p.tx_time_s;
    } else if (!c[4].empty()) {
      throw ConfigError(what + ": line " + std::to_string(ln) +
                        ": rx_time_s must be empty for lost packets");
    }
    p.receiver_id = has_id && !c[5].empty() ? c[5] : default_receiver;
    auto it = index.find(p.receiver_id);
    if (it == index.end()) {
      it = index.emplace(p.receiver_id, log.receivers.size()).first;
      log.receivers.push_back({});
      log.receivers.back().receiver_id = p.receiver_id;
    }
    log.receivers[it->second].records.push_back(std::move(p));
  }
  if (log.receivers.empty()) throw std::invalid_argument("empty log");
  for (auto& r : log.receivers) {
    std::stable_sort(r.records.begin(), r.records.end(),
                     [](const auto& a, const auto& b) { return a.seq < b.seq; });
    log.packets_transmitted = std::max<std::uint64_t>(log.packets_transmitted, r.records.size());
  }
  return log;
}

sim::SimLog read_any_log(const std::string& path) {
  if (fs::path(path).extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open log '" + path + "'");
    return read_field_log(in);
  }
  return read_log_file(path);
}

void atomic_write(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string per_csv(const sim::SimLog& log, double window_width_m) {
  std::ostringstream out;
  out << "receiver_id,d_start_m,d_end_m,d_center_m,transmitted,received,per\n";
  for (const auto& r : log.receivers) {
    for (const auto& b : analysis::bin_per(r.records, window_width_m).bins) {
      out << r.receiver_id << ',' << fmt(b.d_start_m) << ',' << fmt(b.d_end_m) << ','
          << fmt(b.d_center_m) << ',' << b.transmitted << ',' << b.received << ',' << fmt(b.per)
          << '\n';
    }
  }
  return out.str();
}

std::string counts_csv(const sim::SimLog& log, double window_width_m) {
  std::ostringstream out;
  out << "receiver_id,d_start_m,d_end_m,d_center_m,received\n";
  for (const auto& r : log.receivers) {
    for (const auto& b : analysis::received_counts(r.records, window_width_m)) {
      out << r.receiver_id << ',' << fmt(b.d_start_m) << ',' << fmt(b.d_end_m) << ','
          << fmt(b.d_center_m) << ',' << b.received << '\n';
    }
  }
  return out.str();
}

std::string latency_csv(const sim::SimLog& log) {
  std::ostringstream out;
  out << "receiver_id,count,mean_s,p50_s,p95_s,max_s,fraction_below_5ms,fraction_below_period\n";
  for (const auto& r : log.receivers) {
    const bool any = std::any_of(r.records.begin(), r.records.end(),
                                 [](const auto& p) { return p.decoded && p.latency_s; });
    if (!any) {
      out << r.receiver_id << ",0,,,,,,\n";
      continue;
    }
    const auto s = analysis::latency_stats(r.records, log.tx_period_s);
    out << r.receiver_id << ',' << s.count << ',' << fmt(s.mean_s) << ',' << fmt(s.p50_s) << ','
        << fmt(s.p95_s) << ',' << fmt(s.max_s) << ',' << fmt(s.fraction_below_5ms) << ','
        << fmt(s.fraction_below_period) << '\n';
  }
  return out.str();
}

std::string coverage_csv(const analysis::CoverageReport& report) {
  std::ostringstream out;
  out << "receiver_id,d_warn_m,farthest_qualifying_m,contiguous,warning_failure,threshold,"
         "window_m\n";
  const auto row = [&](const std::string& id, double dwarn, double far, bool contiguous,
                       bool failure) {
    out << id << ',' << fmt(dwarn) << ',' << fmt(far) << ',' << (contiguous ? 1 : 0) << ','
        << (failure ? 1 : 0) << ',' << report.threshold_used << ','
        << fmt(report.window_width_m) << '\n';
  };
  for (const auto& r : report.per_receiver) {
    row(r.receiver_id, r.d_warn_m, r.farthest_qualifying_m, r.contiguous, r.warning_failure);
  }
  row("ALL", report.d_warn_m, report.farthest_qualifying_m, report.contiguous,
      report.warning_failure);
  return out.str();
}

std::string safeness_csv(const analysis::SafenessReport& report) {
  std::ostringstream out;
  out << "vehicle_speed_mph,road,braking_time_s,braking_interpolated,t_tac_s,t_prot_s,"
         "psi_zero_distance_m,psi_one_distance_m,system_failed\n";
  for (const auto& r : report.rows) {
    out << fmt(r.vehicle_speed_mph) << ',' << safety::to_string(r.road) << ','
        << fmt(r.braking_time_s) << ',' << (r.braking_interpolated ? 1 : 0) << ','
        << fmt(r.time_to_avoid_collision_s) << ',' << fmt(r.protection_time_s) << ','
        << fmt(r.psi_zero_distance_m) << ',' << fmt(r.psi_one_distance_m) << ','
        << (r.system_failed ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string safeness_curve_csv(const analysis::SafenessReport& report) {
  std::ostringstream out;
  out << "vehicle_speed_mph,road,d_t_m,t_t_s,psi,category,system_failed\n";
  for (const auto& r : report.rows) {
    for (const auto& p : r.curve.points) {
      out << fmt(r.vehicle_speed_mph) << ',' << safety::to_string(r.road) << ','
          << fmt(p.distance_m) << ',' << fmt(p.distance_m / report.train_speed_mps) << ','
          << (p.result.psi ? fmt(*p.result.psi) : std::string()) << ','
          << safety::to_string(p.result.category) << ',' << (p.result.system_failed ? 1 : 0)
          << '\n';
    }
  }
  return out.str();
}

double read_coverage_dwarn(std::istream& in) {
  const std::string what = "coverage report";
  const auto csv = detail::read_csv(in,
                                    {"receiver_id", "d_warn_m", "farthest_qualifying_m",
                                     "contiguous", "warning_failure", "threshold", "window_m"},
                                    what);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    if (csv.rows[i][0] == "ALL") {
      return detail::parse_double(csv.rows[i][1], what, csv.line_numbers[i]);
    }
  }
  throw ConfigError(what + ": no ALL row");
}

}  // namespace railwarn::io
