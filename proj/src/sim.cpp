#include "railwarn/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "railwarn/error.hpp"
#include "railwarn/io.hpp"
#include "railwarn/units.hpp"

namespace railwarn::sim {

void Scenario::validate() const {
  if (version != 1) throw ConfigError("version: unsupported " + std::to_string(version));
  scene.validate();
  if (scene.receivers.empty()) throw ConfigError("scene.receivers: at least one receiver needed");
  radio.validate();
  if (const auto* emp = std::get_if<link::EmpiricalLink>(&channel)) {
    emp->profile.validate();
  } else {
    std::get<link::SyntheticChannel>(channel).validate();
  }
  latency.validate();
  tx_antenna.validate();
  rx_antenna.validate();
  if (!(train.speed_mps > 0.0)) throw ConfigError("train.speed: must be > 0");
  if (!(train.start_m < 0.0 && 0.0 < train.end_m)) {
    throw ConfigError("train: need start_m < 0 < end_m");
  }
  policy.validate();
  if (!(analysis.window_m > 0.0)) throw ConfigError("analysis.window_m must be > 0");
  if (analysis.threshold < 1) throw ConfigError("analysis.threshold must be >= 1");
  if (analysis.reaction_time_s < 0.0 || analysis.system_delay_s < 0.0) {
    throw ConfigError("analysis: reaction and system delay times must be >= 0");
  }
}

const ReceiverLog& SimLog::receiver(const std::string& id) const {
  for (const auto& r : receivers) {
    if (r.receiver_id == id) return r;
  }
  throw std::out_of_range("no receiver '" + id + "' in log");
}

std::uint64_t packet_count(double pass_duration_s, double tx_period_s) {
  if (!(tx_period_s > 0.0) || !(pass_duration_s >= 0.0)) {
    throw std::invalid_argument("packet_count: need period > 0 and duration >= 0");
  }
  // Tolerate representation error when the duration is an exact multiple.
  return static_cast<std::uint64_t>(std::floor(pass_duration_s / tx_period_s + 1e-9)) + 1;
}

SimLog run_pass(const Scenario& scenario, std::uint64_t seed) {
  scenario.validate();
  const double period = scenario.radio.tx_period_s();
  const double v = scenario.train.speed_mps;

  SimLog log;
  log.scenario_digest = io::scenario_digest(scenario);
  log.seed = seed;
  log.tx_period_s = period;
  log.train_speed_mps = v;
  log.pass_duration_s = (scenario.train.end_m - scenario.train.start_m) / v;
  log.packets_transmitted = packet_count(log.pass_duration_s, period);

  protocol::TrainState train;
  train.train_id = scenario.train.train_id;
  train.speed_mps = v;
  train.heading_deg = scenario.scene.track_heading_deg;

  std::vector<protocol::BsmMessage> messages;
  messages.reserve(log.packets_transmitted);
  for (std::uint64_t k = 0; k < log.packets_transmitted; ++k) {
    const double t = static_cast<double>(k) * period;
    train.position_m = scenario.train.start_m + v * t;
    messages.push_back(protocol::generate_bsm(train, static_cast<std::uint32_t>(k), t));
  }

  const auto* synthetic = std::get_if<link::SyntheticChannel>(&scenario.channel);
  link::LatencyModel hop = scenario.latency;
  hop.relay_hops = 1;

  for (const auto& placement : scenario.scene.receivers) {
    Rng rng = Rng::stream(seed, "receiver:" + placement.id);
    ReceiverLog rlog;
    rlog.receiver_id = placement.id;
    rlog.kind = placement.kind;
    rlog.records.reserve(messages.size());

    struct Arrival {
      double rx_time;
      std::size_t index;
    };
    std::vector<Arrival> arrivals;

    for (std::size_t i = 0; i < messages.size(); ++i) {
      const auto& msg = messages[i];
      const double tx_time = static_cast<double>(i) * period;
      const double position = msg.gps_position_m;
      const auto geo = geometry::link_geometry(position, placement, scenario.scene);

      link::LinkInputs in;
      in.train_position_m = position;
      in.range_m = geo.range_m;
      if (synthetic) {
        in.gain_dbi =
            geometry::pattern_gain(scenario.tx_antenna, geo.tx_azimuth_deg, geo.tx_elevation_deg) +
            geometry::pattern_gain(scenario.rx_antenna, geo.rx_azimuth_deg, geo.rx_elevation_deg);
        if (synthetic->shadowing_sigma_db > 0.0) {
          in.shadowing_db = synthetic->shadowing_sigma_db * rng.normal();
        }
      }
      const double p = link::packet_success_probability(scenario.channel, scenario.radio,
                                                        scenario.scene.obstructions, in);
      PacketRecord rec;
      rec.seq = msg.message_count;
      rec.tx_time_s = tx_time;
      rec.train_position_m = position;
      rec.receiver_id = placement.id;
      rec.decoded = rng.uniform() < p;
      if (rec.decoded) {
        const double latency = link::latency_sample(geo.range_m, hop, rng);
        rec.rx_time_s = tx_time + latency;
        rec.latency_s = latency;
        arrivals.push_back({*rec.rx_time_s, i});
      }
      rlog.records.push_back(std::move(rec));
    }

    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.rx_time < b.rx_time; });
    protocol::ReceiverState state(placement.id, placement.kind);
    for (const auto& a : arrivals) {
      if (auto ev = protocol::receiver_ingest(messages[a.index], a.rx_time, state,
                                              scenario.policy)) {
        double delivery = ev->trigger_time_s;
        if (ev->mode == protocol::WarningMode::Indirect) {
          Rng relay_rng = Rng::stream(seed, "relay:" + placement.id);
          delivery = protocol::rsu_relay(*ev, scenario.latency, relay_rng,
                                         std::abs(placement.offset_from_crossing_m));
        }
        log.warnings.push_back({*ev, delivery});
      }
    }
    rlog.reordered = state.reordered;
    log.receivers.push_back(std::move(rlog));
  }
  return log;
}

std::vector<Scenario> expand_grid(const Scenario& base, const SweepGrid& grid) {
  const auto or_base = [](const auto& values, auto fallback) {
    using T = std::decay_t<decltype(fallback)>;
    return values.empty() ? std::vector<T>{fallback} : std::vector<T>(values.begin(), values.end());
  };
  const auto speeds = grid.train_speeds_mph.empty()
                          ? std::vector<double>{base.train.speed_mps}
                          : [&] {
                              std::vector<double> s;
                              for (double mph : grid.train_speeds_mph) s.push_back(mph_to_mps(mph));
                              return s;
                            }();
  const auto powers = or_base(grid.tx_powers_dbm, base.radio.tx_power_dbm);
  const auto mods = or_base(grid.modulations, base.radio.modulation);
  const std::vector<std::string> antennas =
      grid.tx_antennas.empty() ? std::vector<std::string>{""} : grid.tx_antennas;

  std::vector<Scenario> out;
  for (double v : speeds) {
    for (double p : powers) {
      for (auto m : mods) {
        for (const auto& a : antennas) {
          Scenario s = base;
          s.train.speed_mps = v;
          s.radio.tx_power_dbm = p;
          s.radio.modulation = m;
          if (!a.empty()) s.tx_antenna = geometry::AntennaPattern::builtin(a);
          out.push_back(std::move(s));
        }
      }
    }
  }
  return out;
}

std::vector<SweepPoint> run_sweep(const Scenario& base, const SweepGrid& grid,
                                  const std::vector<std::uint64_t>& seeds,
                                  const SweepOptions& options) {
  const auto scenarios = expand_grid(base, grid);
  const std::vector<std::uint64_t> seed_list = seeds.empty() ? std::vector{base.seed} : seeds;

  std::vector<SweepPoint> points;
  for (const auto& s : scenarios) {
    for (auto seed : seed_list) {
      SweepPoint p;
      p.train_speed_mps = s.train.speed_mps;
      p.tx_power_dbm = s.radio.tx_power_dbm;
      p.modulation = s.radio.modulation;
      p.tx_antenna = s.tx_antenna.name;
      p.seed = seed;
      points.push_back(std::move(p));
    }
  }

  std::vector<std::size_t> order = options.execution_order;
  if (order.empty()) {
    order.resize(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  } else {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted.size() != points.size() || sorted[i] != i) {
        throw std::invalid_argument("sweep: execution_order must be a permutation of the grid");
      }
    }
  }

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      const std::size_t idx = order[k];
      try {
        points[idx].log = run_pass(scenarios[idx / seed_list.size()], points[idx].seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return points;
}

}  // namespace railwarn::sim
