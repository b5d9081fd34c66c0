#include "railwarn/link.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "csv.hpp"
#include "railwarn/error.hpp"
#include "railwarn/units.hpp"

namespace railwarn::link {

std::string to_string(Modulation m) { return m == Modulation::QPSK ? "QPSK" : "16QAM"; }

Modulation modulation_from_string(const std::string& text) {
  if (text == "QPSK") return Modulation::QPSK;
  if (text == "16QAM") return Modulation::QAM16;
  throw ConfigError("unknown modulation '" + text + "' (expected QPSK|16QAM)");
}

void RadioConfig::validate(const std::vector<double>& allowed_powers_dbm) const {
  if (std::find(allowed_powers_dbm.begin(), allowed_powers_dbm.end(), tx_power_dbm) ==
      allowed_powers_dbm.end()) {
    std::string allowed;
    for (double p : allowed_powers_dbm) {
      allowed += (allowed.empty() ? "" : ", ") + std::to_string(static_cast<int>(p));
    }
    throw ConfigError("radio.tx_power_dbm: " + std::to_string(tx_power_dbm) +
                      " not in allowed set {" + allowed + "}");
  }
  if (!(tx_period_ms > 0.0)) throw ConfigError("radio.tx_period_ms must be > 0");
  if (packet_size_bytes <= 0) throw ConfigError("radio.packet_size_bytes must be > 0");
  if (!(center_frequency_hz > 0.0)) throw ConfigError("radio.center_frequency_hz must be > 0");
}

void PerProfile::validate() const {
  if (bins.empty()) throw ConfigError("PER profile: no bins");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const auto& b = bins[i];
    if (!(b.d_start_m < b.d_end_m)) throw ConfigError("PER profile: bin start must be < end");
    if (!(b.per >= 0.0 && b.per <= 1.0)) throw ConfigError("PER profile: per must be in [0, 1]");
    if (i > 0 && b.d_start_m < bins[i - 1].d_end_m) {
      throw ConfigError("PER profile: bins must be ordered and non-overlapping");
    }
  }
}

std::optional<double> PerProfile::per_at(double train_position_m) const {
  auto it = std::upper_bound(bins.begin(), bins.end(), train_position_m,
                             [](double d, const PerBin& b) { return d < b.d_start_m; });
  if (it == bins.begin()) return std::nullopt;
  --it;
  if (train_position_m >= it->d_end_m) return std::nullopt;
  return it->per;
}

PerProfile PerProfile::from_csv(std::istream& in) {
  const std::string what = "PER profile";
  const auto csv = detail::read_csv(in, {"d_start_m", "d_end_m", "per"}, what);
  PerProfile p;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const int ln = csv.line_numbers[i];
    p.bins.push_back({detail::parse_double(csv.rows[i][0], what, ln),
                      detail::parse_double(csv.rows[i][1], what, ln),
                      detail::parse_double(csv.rows[i][2], what, ln)});
  }
  p.validate();
  return p;
}

PerProfile PerProfile::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("PER profile: cannot open '" + path + "'");
  return from_csv(in);
}

void SyntheticChannel::validate() const {
  if (!(path_loss_exponent >= 2.0)) throw ConfigError("channel.path_loss_exponent must be >= 2");
  if (!(shadowing_sigma_db >= 0.0)) throw ConfigError("channel.shadowing_sigma_db must be >= 0");
  if (!(transition_width_db > 0.0)) throw ConfigError("channel.transition_width_db must be > 0");
  if (!(qam16_threshold_db > qpsk_threshold_db)) {
    throw ConfigError("channel: 16QAM threshold must exceed the QPSK threshold");
  }
}

double SyntheticChannel::threshold_db(Modulation m) const {
  return m == Modulation::QPSK ? qpsk_threshold_db : qam16_threshold_db;
}

double free_space_reference_loss_db(double frequency_hz) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * frequency_hz / kSpeedOfLight);
}

double path_loss_db(double range_m, const SyntheticChannel& channel, double shadowing_db) {
  if (!(range_m > 0.0)) throw std::domain_error("path loss: range must be > 0");
  return channel.reference_loss_db + 10.0 * channel.path_loss_exponent * std::log10(range_m) +
         shadowing_db;
}

double mean_snr_db(const RadioConfig& radio, const SyntheticChannel& channel, double range_m,
                   double gain_dbi, double excess_loss_db, double shadowing_db) {
  return radio.tx_power_dbm + gain_dbi - path_loss_db(range_m, channel, shadowing_db) -
         excess_loss_db - channel.noise_floor_dbm;
}

double success_from_snr(double snr_db, double threshold_db, double transition_width_db) {
  // 10%..90% of a logistic spans 2 ln 9 scale units.
  const double scale = transition_width_db / (2.0 * std::log(9.0));
  return 1.0 / (1.0 + std::exp(-(snr_db - threshold_db) / scale));
}

double packet_success_probability(const LinkSource& source, const RadioConfig& radio,
                                  const std::vector<geometry::ObstructionSegment>& obstructions,
                                  const LinkInputs& in) {
  if (const auto* emp = std::get_if<EmpiricalLink>(&source)) {
    const auto per = emp->profile.per_at(in.train_position_m);
    if (!per) {
      if (emp->out_of_profile == OutOfProfilePolicy::ZeroSuccess) return 0.0;
      throw std::out_of_range("train position " + std::to_string(in.train_position_m) +
                              " m outside the PER profile");
    }
    return 1.0 - *per;
  }
  const auto& ch = std::get<SyntheticChannel>(source);
  double excess = 0.0;
  for (const auto& o : obstructions) excess += o.excess_loss_at(in.train_position_m);
  const double snr = mean_snr_db(radio, ch, in.range_m, in.gain_dbi, excess, in.shadowing_db);
  return success_from_snr(snr, ch.threshold_db(radio.modulation), ch.transition_width_db);
}

void LatencyModel::validate() const {
  if (!(processing_base_ms >= 0.0)) throw ConfigError("latency.processing_base_ms must be >= 0");
  if (!(processing_jitter_ms >= 0.0)) {
    throw ConfigError("latency.processing_jitter_ms must be >= 0");
  }
  if (processing_jitter_ms > processing_base_ms) {
    throw ConfigError("latency.processing_jitter_ms must not exceed the base (negative delay)");
  }
  if (relay_hops != 1 && relay_hops != 2) throw ConfigError("latency.relay_hops must be 1 or 2");
}

double propagation_delay_s(double range_m) { return range_m / kSpeedOfLight; }

double latency_sample(double range_m, const LatencyModel& model, Rng& rng) {
  if (!(range_m >= 0.0)) throw std::domain_error("latency: range must be >= 0");
  double total = model.relay_hops * propagation_delay_s(range_m);
  for (int hop = 0; hop < model.relay_hops; ++hop) {
    double proc_ms = model.processing_base_ms;
    if (model.processing_jitter_ms > 0.0) {
      proc_ms += rng.uniform(-model.processing_jitter_ms, model.processing_jitter_ms);
    }
    total += proc_ms / 1000.0;
  }
  return total;
}

}  // namespace railwarn::link
