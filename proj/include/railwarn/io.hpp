#pragma once

// Scenario configuration files, JSON-lines packet logs, field-capture CSV
// ingestion and the CSV report writers.
//
// Units throughout: distances meters (signed, crossing at 0), times seconds
// unless a key ends in _ms, powers dBm, gains dBi.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "railwarn/analysis.hpp"
#include "railwarn/sim.hpp"

namespace railwarn::io {

/// Canonical JSON form; every field explicit.
nlohmann::json scenario_to_json(const sim::Scenario& scenario);

/// Builds and validates a scenario. Unknown keys, missing required keys and
/// out-of-range values throw ConfigError naming the offending key path.
/// Relative table paths resolve against `base_dir`.
sim::Scenario scenario_from_json(const nlohmann::json& doc, const std::string& base_dir = ".");

/// Parses config text (JSON, comments allowed). Syntax errors report the
/// line and column.
sim::Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");
sim::Scenario load_scenario(const std::string& path);
std::string write_scenario(const sim::Scenario& scenario);

/// Stable hash of the canonical configuration, e.g. "fnv1a64:0123abcd...".
std::string scenario_digest(const sim::Scenario& scenario);

void write_log(std::ostream& out, const sim::SimLog& log);
std::string log_to_string(const sim::SimLog& log);
/// Throws std::invalid_argument("empty log") when no packet records exist.
sim::SimLog read_log(std::istream& in);
sim::SimLog read_log_file(const std::string& path);

/// Externally captured logs: CSV header
/// `seq,tx_time_s,train_position_m,decoded,rx_time_s` with an optional
/// trailing `receiver_id` column. rx_time_s is empty for lost packets.
sim::SimLog read_field_log(std::istream& in, const std::string& default_receiver = "field");

/// Reads a JSON-lines log, or a field CSV when the path ends in ".csv".
sim::SimLog read_any_log(const std::string& path);

/// Writes to `path` via a temporary sibling and rename.
void atomic_write(const std::string& path, const std::string& content);

std::string per_csv(const sim::SimLog& log, double window_width_m);
std::string counts_csv(const sim::SimLog& log, double window_width_m);
std::string latency_csv(const sim::SimLog& log);
std::string coverage_csv(const analysis::CoverageReport& report);
std::string safeness_csv(const analysis::SafenessReport& report);
std::string safeness_curve_csv(const analysis::SafenessReport& report);

/// Reads the combined d_warn back out of a coverage CSV.
double read_coverage_dwarn(std::istream& in);

}  // namespace railwarn::io
