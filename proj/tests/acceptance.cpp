// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "railwarn/analysis.hpp"
#include "railwarn/io.hpp"
#include "railwarn/safety.hpp"
#include "railwarn/sim.hpp"
#include "railwarn/units.hpp"

using namespace railwarn;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

sim::Scenario empirical_pass(std::vector<link::PerBin> bins, double mph, double start,
                             double end) {
  sim::Scenario s;
  s.channel = link::EmpiricalLink{link::PerProfile{std::move(bins)},
                                  link::OutOfProfilePolicy::ZeroSuccess};
  s.train.speed_mps = mph_to_mps(mph);
  s.train.start_m = start;
  s.train.end_m = end;
  return s;
}

Outcome table_reproduction() {
  Outcome o;
  const double mph[] = {25, 35, 45, 55, 65};
  const double dry[] = {2.3, 2.66, 2.96, 3.27, 3.57};
  const double wet[] = {4.62, 5.32, 5.91, 6.52, 7.15};
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double d = safety::braking_time(mph[i], safety::RoadCondition::Dry).seconds;
    const double w = safety::braking_time(mph[i], safety::RoadCondition::Wet).seconds;
    worst = std::max({worst, std::abs(d - dry[i]), std::abs(w - wet[i])});
  }
  o.require(worst <= 0.02, "max |t_b error| " + fmt("%.4f", worst));
  o.detail = o.pass ? "max |t_b error| " + fmt("%.4f s", worst) : o.detail;
  return o;
}

Outcome tac_oracle() {
  Outcome o;
  const double got[] = {safety::time_to_avoid_collision(500, mph_to_mps(20)),
                        safety::time_to_avoid_collision(500, mph_to_mps(50)),
                        safety::time_to_avoid_collision(450, mph_to_mps(79))};
  const double oracle[] = {55.923, 22.369, 12.742};
  const double reported[] = {56, 22, 12};
  for (int i = 0; i < 3; ++i) {
    o.require(std::abs(got[i] - oracle[i]) < 1e-3, "oracle mismatch " + fmt("%.3f", got[i]));
    o.require(std::abs(got[i] - reported[i]) <= 1.0, "rounded-value mismatch " + fmt("%.3f", got[i]));
  }
  if (o.pass) {
    o.detail = fmt("%.1f/", got[0]) + fmt("%.1f/", got[1]) + fmt("%.1f s", got[2]);
  }
  return o;
}

Outcome protection_band() {
  Outcome o;
  analysis::SafenessOptions opts;
  opts.reaction_time_s = 3.5;
  opts.system_delay_s = 0.005;
  const auto rep = analysis::safeness_report(200.0, mph_to_mps(10.0), analysis::VehicleGrid{}, opts);
  o.require(rep.rows.size() == 10, "grid size");
  o.require(rep.min_protection_time_s >= 34.0 && rep.max_protection_time_s <= 39.0,
            "band outside [34, 39]");
  o.require(std::abs(rep.min_protection_time_s - 35.0) <= 2.0 &&
                std::abs(rep.max_protection_time_s - 40.0) <= 2.0,
            "band edges further than 2 s from 35-40 s");
  if (o.pass) {
    o.detail = "t_prot in [" + fmt("%.2f", rep.min_protection_time_s) + ", " +
               fmt("%.2f] s", rep.max_protection_time_s);
  }
  return o;
}

Outcome psi_identities() {
  Outcome o;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> tr(0.0, 5.0);
  std::uniform_real_distribution<double> ts(0.0, 0.1);
  std::uniform_real_distribution<double> tb(0.0, 8.0);
  std::uniform_real_distribution<double> tac(0.0, 60.0);
  std::uniform_real_distribution<double> tt(0.0, 80.0);
  const int N = 20000;
  int traps = 0;
  for (int i = 0; i < N && o.pass; ++i) {
    const double r = tr(gen), s = ts(gen), b = tb(gen), a = tac(gen), t = tt(gen);
    const double S = r + s + b;
    const auto at_tac = safety::safeness_level(a, a, r, s, b);
    const auto at_stop = safety::safeness_level(S, a, r, s, b);
    const auto gen_pt = safety::safeness_level(t, a, r, s, b);
    const bool failed = a - S <= 0.0;
    if (failed) {
      o.require(at_tac.system_failed && at_stop.system_failed && gen_pt.system_failed,
                "system_failed not forced");
      o.require(gen_pt.category == safety::SafenessCategory::NotSafe, "failed but not NotSafe");
      if (t < S && gen_pt.psi && *gen_pt.psi > 0.0) ++traps;
      continue;
    }
    o.require(at_tac.psi && *at_tac.psi == 1.0, "psi != 1 at t_TAC");
    o.require(at_stop.psi && *at_stop.psi == 0.0, "psi != 0 at S");
    using C = safety::SafenessCategory;
    o.require((gen_pt.category == C::NoRisk) == (t >= a), "NoRisk equivalence");
    o.require((gen_pt.category == C::SafeButClose) == (S <= t && t < a), "SafeButClose equivalence");
    o.require((gen_pt.category == C::NotSafe) == (t < S), "NotSafe equivalence");
  }
  // The negative/negative case explicitly.
  const auto trap = safety::safeness_level(2.0, 5.0, 3.5, 0.005, 4.62);
  o.require(trap.system_failed && trap.psi && *trap.psi > 0.0 &&
                trap.category == safety::SafenessCategory::NotSafe,
            "negative/negative trap");
  if (o.pass) {
    o.detail = std::to_string(N) + " samples, " + std::to_string(traps) +
               " random negative/negative traps caught";
  }
  return o;
}

Outcome packet_count_law() {
  Outcome o;
  struct Case {
    double mph;
    double window;
    double reported;
  };
  const Case cases[] = {{20, 50, 118}, {50, 50, 47}, {79, 50, 29}, {10, 20, 94}};
  std::string out;
  for (const auto& c : cases) {
    const auto s = empirical_pass({{-2000.0, 2000.0, 0.0}}, c.mph, -1000.0, 100.0);
    const auto log = sim::run_pass(s);
    const auto per = analysis::bin_per(log.receivers.front().records, c.window);
    const double nominal = c.window / (mph_to_mps(c.mph) * 0.05);
    double sum = 0.0;
    int n = 0;
    for (const auto& b : per.bins) {
      // Interior windows only; the ends are partial.
      if (b.d_start_m < -1000.0 + c.window || b.d_end_m > 0.0) continue;
      o.require(std::abs(static_cast<double>(b.transmitted) - nominal) <= 1.0,
                "window count far from nominal at " + fmt("%g mph", c.mph));
      sum += static_cast<double>(b.transmitted);
      ++n;
    }
    const double mean = sum / n;
    o.require(std::abs(mean - c.reported) / c.reported <= 0.10, "more than 10% from reported count");
    out += fmt("%.2f", mean) + "/" + fmt("%g ", c.reported);
  }
  if (o.pass) o.detail = "mean simulated/reported per window: " + out;
  return o;
}

Outcome coverage_oracle() {
  Outcome o;
  const auto cover = [](const sim::Scenario& s) {
    return analysis::extract_coverage(sim::run_pass(s), 50.0, 5);
  };
  for (double mph : {20.0, 50.0}) {
    const auto rep = cover(empirical_pass({{-2000, -500, 1.0}, {-500, 0, 0.0}, {0, 2000, 1.0}},
                                          mph, -1000.0, 100.0));
    o.require(rep.d_warn_m == 500.0, fmt("%g mph d_warn ", mph) + fmt("%g", rep.d_warn_m));
  }
  const auto fast = cover(empirical_pass({{-2000, -450, 1.0}, {-450, 0, 0.0}, {0, 2000, 1.0}},
                                         79.0, -1000.0, 100.0));
  o.require(fast.d_warn_m == 450.0, "79 mph d_warn " + fmt("%g", fast.d_warn_m));

  const auto shadow = cover(empirical_pass({{-2000, -350, 1.0},
                                            {-350, -300, 0.0},
                                            {-300, -250, 1.0},
                                            {-250, 0, 0.0},
                                            {0, 2000, 1.0}},
                                           20.0, -1000.0, 100.0));
  o.require(shadow.d_warn_m == 250.0 && shadow.farthest_qualifying_m == 350.0 &&
                !shadow.contiguous,
            "shadowing split " + fmt("%g/", shadow.d_warn_m) + fmt("%g", shadow.farthest_qualifying_m));
  if (o.pass) o.detail = "500/500/450 m; shadowing contiguous 250 m, farthest 350 m";
  return o;
}

Outcome empirical_round_trip() {
  Outcome o;
  const double pers[] = {0.9, 0.5, 0.3, 0.1, 0.02, 0.0};
  std::vector<link::PerBin> bins;
  for (int i = 0; i < 6; ++i) bins.push_back({-300.0 + 50.0 * i, -250.0 + 50.0 * i, pers[i]});
  auto s = empirical_pass(bins, 0.0, -300.0, 0.01);
  s.train.speed_mps = 0.09;
  const auto log = sim::run_pass(s, 77);
  const auto series = analysis::bin_per(log.receivers.front().records, 50.0);
  long long min_n = -1;
  int checked = 0;
  for (const auto& b : series.bins) {
    if (b.d_end_m > 0.0) continue;
    const int idx = static_cast<int>(std::lround((b.d_start_m + 300.0) / 50.0));
    const double truth = pers[idx];
    const auto ci =
        analysis::wilson_interval(b.transmitted - b.received, b.transmitted, analysis::kZ99);
    o.require(truth >= ci.lo && truth <= ci.hi, "PER outside 99% CI at " + fmt("%g", b.d_start_m));
    min_n = min_n < 0 ? b.transmitted : std::min(min_n, b.transmitted);
    ++checked;
  }
  o.require(checked == 6, "expected 6 bins");
  o.require(min_n >= 10000, "fewer than 1e4 packets in a bin");
  if (o.pass) o.detail = std::to_string(checked) + " bins, >= " + std::to_string(min_n) + " packets each";
  return o;
}

Outcome latency_contract() {
  Outcome o;
  sim::Scenario s;
  s.train.speed_mps = mph_to_mps(20.0);
  s.train.start_m = -1000.0;
  s.train.end_m = 300.0;
  geometry::Placement obu;
  obu.id = "obu";
  obu.kind = geometry::ReceiverKind::OBU;
  obu.offset_from_crossing_m = 42.0;
  obu.height_m = 1.7;
  s.scene.receivers.push_back(obu);
  const auto log = sim::run_pass(s, 5);
  long long n = 0;
  for (const auto& r : log.receivers) {
    const auto st = analysis::latency_stats(r.records);
    o.require(st.max_s < 0.050, "latency >= 50 ms");
    o.require(st.fraction_below_5ms >= 0.95, "fewer than 95% below 5 ms");
    n += st.count;
  }
  const double prop = link::propagation_delay_s(300.0);
  o.require(prop < 1.01e-6, "propagation at 300 m " + fmt("%g", prop));
  if (o.pass) {
    o.detail = std::to_string(n) + " decoded packets checked; propagation at 300 m " +
               fmt("%.6f us", prop * 1e6);
  }
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  sim::Scenario s;
  s.train.speed_mps = mph_to_mps(35.0);
  s.train.start_m = -600.0;
  s.train.end_m = 100.0;
  link::SyntheticChannel ch;
  ch.path_loss_exponent = 3.4;
  s.channel = ch;

  const auto dir = std::filesystem::temp_directory_path() / "railwarn_acceptance";
  io::atomic_write((dir / "a.jsonl").string(), io::log_to_string(sim::run_pass(s, 11)));
  io::atomic_write((dir / "b.jsonl").string(), io::log_to_string(sim::run_pass(s, 11)));
  const auto a = slurp(dir / "a.jsonl");
  o.require(!a.empty() && a == slurp(dir / "b.jsonl"), "log files differ");
  std::filesystem::remove_all(dir);

  sim::SweepGrid grid;
  grid.train_speeds_mph = {20.0, 50.0, 79.0};
  grid.tx_powers_dbm = {11.0, 23.0};
  grid.tx_antennas = {"omni12", "bidirectional23"};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  sim::SweepOptions serial;
  serial.threads = 1;
  sim::SweepOptions parallel;
  parallel.threads = 8;
  const auto ref = sim::run_sweep(s, grid, seeds, serial);
  for (std::size_t i = ref.size(); i-- > 0;) parallel.execution_order.push_back(i);
  const auto par = sim::run_sweep(s, grid, seeds, parallel);
  std::shuffle(parallel.execution_order.begin(), parallel.execution_order.end(),
               std::mt19937_64(5));
  const auto shuffled = sim::run_sweep(s, grid, seeds, parallel);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto text = io::log_to_string(ref[i].log);
    o.require(text == io::log_to_string(par[i].log) && text == io::log_to_string(shuffled[i].log),
              "sweep point " + std::to_string(i) + " differs");
  }
  if (o.pass) o.detail = "byte-identical logs; " + std::to_string(ref.size()) + " sweep points order-independent";
  return o;
}

Outcome minimum_range_rule() {
  Outcome o;
  const double mr = safety::minimum_required_range(mph_to_mps(35.0), 3.5, 7.15);
  o.require(std::abs(mr - 166.6) <= 0.1, "minimum range " + fmt("%.3f", mr));

  // Simulated grid: train speeds x channel severity x vehicle grid.
  int implications = 0;
  int successes = 0;
  for (double mph : {10.0, 20.0, 35.0, 50.0, 79.0}) {
    for (double n : {2.7, 3.0, 3.3, 3.6, 4.0}) {
      sim::Scenario s;
      s.train.speed_mps = mph_to_mps(mph);
      s.train.start_m = -1000.0;
      s.train.end_m = 50.0;
      link::SyntheticChannel ch;
      ch.path_loss_exponent = n;
      s.channel = ch;
      const auto log = sim::run_pass(s, 3);
      const auto cov = analysis::extract_coverage(log, 50.0, 5);
      const bool success = !cov.warning_failure && !log.warnings.empty();
      if (!success) continue;
      ++successes;
      const auto rep = analysis::safeness_report(cov, s.train.speed_mps, analysis::VehicleGrid{});
      for (const auto& row : rep.rows) {
        const double need =
            safety::minimum_required_range(s.train.speed_mps, 3.5, row.braking_time_s);
        if (cov.d_warn_m >= need) {
          ++implications;
          o.require(row.protection_time_s > 0.0,
                    fmt("t_prot <= 0 at %g mph", mph) + fmt(" d_warn %g", cov.d_warn_m));
        }
      }
    }
  }
  o.require(implications > 0, "implication never exercised");
  if (o.pass) {
    o.detail = "range " + fmt("%.2f m; ", mr) + std::to_string(implications) +
               " grid rows with d_warn >= range over " + std::to_string(successes) +
               " successful passes";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"braking table reproduction", table_reproduction},
      {"t_TAC oracle", tac_oracle},
      {"indirect protection band", protection_band},
      {"psi boundary identities", psi_identities},
      {"packet-count law", packet_count_law},
      {"coverage extraction oracle", coverage_oracle},
      {"empirical PER round trip", empirical_round_trip},
      {"latency contract", latency_contract},
      {"determinism", determinism},
      {"minimum-range rule", minimum_range_rule},
  };
  int failures = 0;
  int idx = 0;
  for (const auto& [name, fn] : criteria) {
    ++idx;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %-28s %s  %s\n", idx, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
