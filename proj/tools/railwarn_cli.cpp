// railwarn: simulate crossing passes and run the reception/safeness analysis.
//
// Exit codes: 0 success, 1 usage, 2 config/schema, 3 runtime.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "railwarn/analysis.hpp"
#include "railwarn/error.hpp"
#include "railwarn/io.hpp"
#include "railwarn/safety.hpp"
#include "railwarn/sim.hpp"
#include "railwarn/units.hpp"

namespace {

namespace fs = std::filesystem;
using namespace railwarn;

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": not a number: '" + s + "'");
  }
}

// "10mph", "4.47mps", "4.47m/s" or a bare number in m/s.
double parse_speed(const std::string& text) {
  const auto ends_with = [&](const std::string& suffix) {
    return text.size() > suffix.size() &&
           text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("mph")) return mph_to_mps(to_number(text.substr(0, text.size() - 3), "speed"));
  if (ends_with("mps")) return to_number(text.substr(0, text.size() - 3), "speed");
  if (ends_with("m/s")) return to_number(text.substr(0, text.size() - 3), "speed");
  return to_number(text, "speed");
}

std::vector<double> number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_number(item, what));
  return out;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    io::atomic_write(path, content);
  }
}

sim::SweepGrid parse_grid(const std::string& text) {
  sim::SweepGrid grid;
  for (const auto& clause : split(text, ';')) {
    const auto eq = clause.find('=');
    if (eq == std::string::npos) throw UsageError("--grid: expected key=v1,v2 clauses");
    const std::string key = clause.substr(0, eq);
    const std::string values = clause.substr(eq + 1);
    if (key == "speeds") {
      grid.train_speeds_mph = number_list(values, "--grid speeds");
    } else if (key == "powers") {
      grid.tx_powers_dbm = number_list(values, "--grid powers");
    } else if (key == "modulations") {
      for (const auto& m : split(values, ',')) grid.modulations.push_back(link::modulation_from_string(m));
    } else if (key == "antennas") {
      grid.tx_antennas = split(values, ',');
    } else {
      throw UsageError("--grid: unknown dimension '" + key +
                       "' (expected speeds|powers|modulations|antennas)");
    }
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train-crossing warning simulator and reception analysis"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config;
  std::string sim_out = "sim.jsonl";
  std::uint64_t sim_seed = 0;
  bool sim_seed_given = false;
  auto* simulate = app.add_subcommand("simulate", "Run one train pass and write a packet log");
  simulate->add_option("config", sim_config, "Scenario config file")->required();
  simulate->add_option("-o,--out", sim_out, "Output log (JSON lines)");
  simulate->add_option("--seed", sim_seed, "Override the config seed")
      ->each([&](const std::string&) { sim_seed_given = true; });

  // analyze
  std::string an_log;
  double an_window = 50.0;
  std::string an_dir = ".";
  auto* analyze = app.add_subcommand("analyze", "PER, received-count and latency CSVs from a log");
  analyze->add_option("log", an_log, "Packet log (.jsonl) or field capture (.csv)")->required();
  analyze->add_option("--window", an_window, "Distance window width in meters");
  analyze->add_option("--out-dir", an_dir, "Directory for per.csv, counts.csv, latency.csv");

  // coverage
  std::string cov_log;
  long long cov_threshold = 5;
  double cov_window = 50.0;
  std::string cov_out;
  auto* coverage = app.add_subcommand("coverage", "Extract the warning coverage range d_warn");
  coverage->add_option("log", cov_log, "Packet log (.jsonl) or field capture (.csv)")->required();
  coverage->add_option("--threshold", cov_threshold, "Packets required per window");
  coverage->add_option("--window", cov_window, "Distance window width in meters");
  coverage->add_option("-o,--out", cov_out, "Output CSV (default stdout)");

  // safeness
  double sf_dwarn = -1.0;
  std::string sf_cov_from;
  std::string sf_speed;
  std::string sf_vehicles = "25,35,45,55,65";
  std::string sf_roads = "dry,wet";
  double sf_tr = safety::kDefaultReactionTime;
  double sf_ts = safety::kDefaultSystemDelay;
  double sf_step = 1.0;
  std::string sf_table;
  std::string sf_out;
  std::string sf_curve;
  auto* safeness = app.add_subcommand("safeness", "Protection time and safeness curves");
  auto* dwarn_opt = safeness->add_option("--dwarn", sf_dwarn, "Warning distance in meters");
  auto* from_opt =
      safeness->add_option("--coverage-from", sf_cov_from, "Take d_warn from a coverage CSV");
  dwarn_opt->excludes(from_opt);
  safeness->add_option("--train-speed", sf_speed, "Train speed, e.g. 10mph or 4.47mps")
      ->required();
  safeness->add_option("--vehicle-grid", sf_vehicles, "Vehicle speeds in mph");
  safeness->add_option("--roads", sf_roads, "Road conditions (dry,wet)");
  safeness->add_option("--t-r", sf_tr, "Driver reaction time, s");
  safeness->add_option("--t-s", sf_ts, "System delay, s");
  safeness->add_option("--step", sf_step, "Curve sampling step, m");
  safeness->add_option("--braking-table", sf_table, "Override braking table CSV");
  safeness->add_option("-o,--out", sf_out, "Protection-time table CSV (default stdout)");
  safeness->add_option("--curve-out", sf_curve, "Safeness curve CSV");

  // sweep
  std::string sw_config;
  std::string sw_grid;
  std::string sw_seeds;
  std::string sw_dir = "sweep";
  unsigned sw_threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a configuration grid");
  sweep->add_option("config", sw_config, "Base scenario config")->required();
  sweep->add_option("--grid", sw_grid,
                    "Grid, e.g. 'speeds=20,50,79;powers=11,23;modulations=QPSK,16QAM;"
                    "antennas=omni12,bidirectional23'");
  sweep->add_option("--seeds", sw_seeds, "Comma-separated seeds (default: config seed)");
  sweep->add_option("--threads", sw_threads, "Worker threads (0: all cores)");
  sweep->add_option("--out-dir", sw_dir, "Directory for point logs and summary.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*simulate) {
      const auto scenario = io::load_scenario(sim_config);
      const auto log = sim::run_pass(scenario, sim_seed_given ? sim_seed : scenario.seed);
      emit(sim_out, io::log_to_string(log));
    } else if (*analyze) {
      const auto log = io::read_any_log(an_log);
      io::atomic_write((fs::path(an_dir) / "per.csv").string(), io::per_csv(log, an_window));
      io::atomic_write((fs::path(an_dir) / "counts.csv").string(), io::counts_csv(log, an_window));
      io::atomic_write((fs::path(an_dir) / "latency.csv").string(), io::latency_csv(log));
    } else if (*coverage) {
      const auto log = io::read_any_log(cov_log);
      emit(cov_out, io::coverage_csv(analysis::extract_coverage(log, cov_window, cov_threshold)));
    } else if (*safeness) {
      double dwarn = sf_dwarn;
      if (!sf_cov_from.empty()) {
        std::ifstream in(sf_cov_from);
        if (!in) throw ConfigError("cannot open coverage report '" + sf_cov_from + "'");
        dwarn = io::read_coverage_dwarn(in);
      } else if (dwarn < 0.0) {
        throw UsageError("safeness: one of --dwarn or --coverage-from is required");
      }
      analysis::VehicleGrid grid;
      grid.speeds_mph = number_list(sf_vehicles, "--vehicle-grid");
      grid.roads.clear();
      for (const auto& r : split(sf_roads, ',')) grid.roads.push_back(safety::road_from_string(r));
      analysis::SafenessOptions opt;
      opt.reaction_time_s = sf_tr;
      opt.system_delay_s = sf_ts;
      opt.sweep_step_m = sf_step;
      const auto table = sf_table.empty() ? safety::VehicleBrakingTable::standard()
                                          : safety::VehicleBrakingTable::from_csv_file(sf_table);
      const auto report = analysis::safeness_report(dwarn, parse_speed(sf_speed), grid, opt, table);
      emit(sf_out, io::safeness_csv(report));
      if (!sf_curve.empty()) io::atomic_write(sf_curve, io::safeness_curve_csv(report));
    } else if (*sweep) {
      const auto base = io::load_scenario(sw_config);
      const auto grid = parse_grid(sw_grid);
      std::vector<std::uint64_t> seeds;
      for (double s : number_list(sw_seeds, "--seeds")) seeds.push_back(static_cast<std::uint64_t>(s));
      sim::SweepOptions opt;
      opt.threads = sw_threads;
      const auto points = sim::run_sweep(base, grid, seeds, opt);

      std::ostringstream summary;
      summary << "point,train_speed_mph,tx_power_dbm,modulation,tx_antenna,seed,packets,"
                 "d_warn_m,farthest_qualifying_m,log\n";
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu.jsonl", i);
        io::atomic_write((fs::path(sw_dir) / name).string(), io::log_to_string(p.log));
        const auto cov =
            analysis::extract_coverage(p.log, base.analysis.window_m, base.analysis.threshold);
        summary << i << ',' << mps_to_mph(p.train_speed_mps) << ',' << p.tx_power_dbm << ','
                << link::to_string(p.modulation) << ',' << p.tx_antenna << ',' << p.seed << ','
                << p.log.packets_transmitted << ',' << cov.d_warn_m << ','
                << cov.farthest_qualifying_m << ',' << name << '\n';
      }
      io::atomic_write((fs::path(sw_dir) / "summary.csv").string(), summary.str());
    }
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
