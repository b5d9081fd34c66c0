#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "railwarn/analysis.hpp"
#include "railwarn/error.hpp"
#include "railwarn/io.hpp"
#include "railwarn/safety.hpp"
#include "railwarn/sim.hpp"
#include "railwarn/units.hpp"

namespace py = pybind11;
using namespace railwarn;

namespace {

py::dict warning_dict(const sim::LoggedWarning& w) {
  py::dict d;
  d["receiver_id"] = w.event.receiver_id;
  d["mode"] = protocol::to_string(w.event.mode);
  d["trigger_time_s"] = w.event.trigger_time_s;
  d["warning_distance_m"] = w.event.warning_distance_m();
  d["packets_seen"] = w.event.packets_seen;
  d["delivery_time_s"] = w.delivery_time_s;
  return d;
}

py::dict coverage_dict(const analysis::CoverageReport& r) {
  py::dict d;
  d["d_warn_m"] = r.d_warn_m;
  d["farthest_qualifying_m"] = r.farthest_qualifying_m;
  d["contiguous"] = r.contiguous;
  d["warning_failure"] = r.warning_failure;
  d["threshold"] = r.threshold_used;
  d["window_m"] = r.window_width_m;
  py::list per;
  for (const auto& c : r.per_receiver) {
    py::dict e;
    e["receiver_id"] = c.receiver_id;
    e["d_warn_m"] = c.d_warn_m;
    e["farthest_qualifying_m"] = c.farthest_qualifying_m;
    e["contiguous"] = c.contiguous;
    e["warning_failure"] = c.warning_failure;
    per.append(e);
  }
  d["receivers"] = per;
  return d;
}

}  // namespace

PYBIND11_MODULE(_railwarn, m) {
  m.doc() = "Railway crossing warning simulation and analysis";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("mph_to_mps", &mph_to_mps);

  m.def(
      "braking_time",
      [](double mph, const std::string& road) {
        return safety::braking_time(mph, safety::road_from_string(road)).seconds;
      },
      py::arg("vehicle_speed_mph"), py::arg("road") = "dry");
  m.def("time_to_crossing", &safety::time_to_crossing, py::arg("distance_m"),
        py::arg("train_speed_mps"));
  m.def("time_to_avoid_collision", &safety::time_to_avoid_collision,
        py::arg("warning_distance_m"), py::arg("train_speed_mps"));
  m.def("protection_time", &safety::protection_time, py::arg("t_tac_s"), py::arg("t_r_s"),
        py::arg("t_s_s"), py::arg("t_b_s"));
  m.def("minimum_required_range", &safety::minimum_required_range, py::arg("train_speed_mps"),
        py::arg("t_r_s"), py::arg("t_b_s"), py::arg("t_s_s") = 0.0);
  m.def(
      "safeness_level",
      [](double t_t, double t_tac, double t_r, double t_s, double t_b) {
        const auto r = safety::safeness_level(t_t, t_tac, t_r, t_s, t_b);
        py::dict d;
        d["psi"] = r.psi ? py::cast(*r.psi) : py::none();
        d["category"] = std::string(safety::to_string(r.category));
        d["system_failed"] = r.system_failed;
        return d;
      },
      py::arg("t_t_s"), py::arg("t_tac_s"), py::arg("t_r_s"), py::arg("t_s_s"), py::arg("t_b_s"));

  m.def(
      "safeness_report",
      [](double d_warn, double train_speed_mps, std::vector<double> speeds,
         std::vector<std::string> roads, double t_r, double t_s) {
        analysis::VehicleGrid grid;
        grid.speeds_mph = std::move(speeds);
        grid.roads.clear();
        for (const auto& r : roads) grid.roads.push_back(safety::road_from_string(r));
        analysis::SafenessOptions opts;
        opts.reaction_time_s = t_r;
        opts.system_delay_s = t_s;
        const auto rep = analysis::safeness_report(d_warn, train_speed_mps, grid, opts);
        py::list rows;
        for (const auto& row : rep.rows) {
          py::dict d;
          d["vehicle_speed_mph"] = row.vehicle_speed_mph;
          d["road"] = std::string(safety::to_string(row.road));
          d["braking_time_s"] = row.braking_time_s;
          d["t_tac_s"] = row.time_to_avoid_collision_s;
          d["t_prot_s"] = row.protection_time_s;
          d["system_failed"] = row.system_failed;
          rows.append(d);
        }
        return rows;
      },
      py::arg("d_warn_m"), py::arg("train_speed_mps"),
      py::arg("vehicle_speeds_mph") = std::vector<double>{25, 35, 45, 55, 65},
      py::arg("roads") = std::vector<std::string>{"dry", "wet"},
      py::arg("t_r_s") = safety::kDefaultReactionTime,
      py::arg("t_s_s") = safety::kDefaultSystemDelay);

  py::class_<sim::Scenario>(m, "Scenario")
      .def_static("from_file", &io::load_scenario, py::arg("path"))
      .def_static("from_text", &io::parse_scenario, py::arg("text"), py::arg("base_dir") = ".")
      .def("to_text", &io::write_scenario)
      .def("digest", &io::scenario_digest)
      .def_readwrite("seed", &sim::Scenario::seed)
      .def_property(
          "train_speed_mps", [](const sim::Scenario& s) { return s.train.speed_mps; },
          [](sim::Scenario& s, double v) { s.train.speed_mps = v; })
      .def("__eq__", [](const sim::Scenario& a, const sim::Scenario& b) { return a == b; });

  py::class_<sim::SimLog>(m, "SimLog")
      .def_static(
          "from_text",
          [](const std::string& text) {
            std::istringstream in(text);
            return io::read_log(in);
          },
          py::arg("text"))
      .def_static("from_file", &io::read_any_log, py::arg("path"))
      .def("to_text", &io::log_to_string)
      .def_readonly("seed", &sim::SimLog::seed)
      .def_readonly("packets_transmitted", &sim::SimLog::packets_transmitted)
      .def_readonly("scenario_digest", &sim::SimLog::scenario_digest)
      .def_property_readonly("receiver_ids",
                             [](const sim::SimLog& l) {
                               std::vector<std::string> ids;
                               for (const auto& r : l.receivers) ids.push_back(r.receiver_id);
                               return ids;
                             })
      .def_property_readonly("warnings",
                             [](const sim::SimLog& l) {
                               py::list out;
                               for (const auto& w : l.warnings) out.append(warning_dict(w));
                               return out;
                             })
      .def("__eq__", [](const sim::SimLog& a, const sim::SimLog& b) { return a == b; });

  m.def(
      "simulate",
      [](const sim::Scenario& s, std::optional<std::uint64_t> seed) {
        py::gil_scoped_release release;
        return sim::run_pass(s, seed.value_or(s.seed));
      },
      py::arg("scenario"), py::arg("seed") = py::none());

  m.def(
      "coverage",
      [](const sim::SimLog& log, double window, long long threshold) {
        return coverage_dict(analysis::extract_coverage(log, window, threshold));
      },
      py::arg("log"), py::arg("window_m") = 50.0, py::arg("threshold") = 5);

  m.def(
      "per_bins",
      [](const sim::SimLog& log, const std::string& receiver_id, double window) {
        const auto s = analysis::bin_per(log.receiver(receiver_id).records, window);
        py::list out;
        for (const auto& b : s.bins) {
          py::dict d;
          d["d_start_m"] = b.d_start_m;
          d["d_end_m"] = b.d_end_m;
          d["transmitted"] = b.transmitted;
          d["received"] = b.received;
          d["per"] = b.per;
          out.append(d);
        }
        return out;
      },
      py::arg("log"), py::arg("receiver_id"), py::arg("window_m") = 50.0);

  m.def(
      "latency_stats",
      [](const sim::SimLog& log, const std::string& receiver_id) {
        const auto s = analysis::latency_stats(log.receiver(receiver_id).records, log.tx_period_s);
        py::dict d;
        d["count"] = s.count;
        d["mean_s"] = s.mean_s;
        d["p50_s"] = s.p50_s;
        d["p95_s"] = s.p95_s;
        d["max_s"] = s.max_s;
        d["fraction_below_5ms"] = s.fraction_below_5ms;
        return d;
      },
      py::arg("log"), py::arg("receiver_id"));
}
