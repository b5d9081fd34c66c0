#pragma once

// Per-packet link model: success probability from either a measured
// distance-binned PER profile or a synthetic path-loss channel, and the
// system-delay (latency) model.

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "railwarn/geometry.hpp"
#include "railwarn/rng.hpp"

namespace railwarn::link {

enum class Modulation { QPSK, QAM16 };

std::string to_string(Modulation m);
Modulation modulation_from_string(const std::string& text);

struct RadioConfig {
  double center_frequency_hz = 5.87e9;
  int channel_number = 174;
  double tx_power_dbm = 23.0;
  Modulation modulation = Modulation::QPSK;
  int packet_size_bytes = 99;
  double tx_period_ms = 50.0;

  /// Throws ConfigError when power is not in `allowed_powers_dbm` or the
  /// period/size are non-positive.
  void validate(const std::vector<double>& allowed_powers_dbm = {11.0, 23.0}) const;
  double tx_period_s() const { return tx_period_ms / 1000.0; }

  bool operator==(const RadioConfig&) const = default;
};

struct PerBin {
  double d_start_m = 0.0;
  double d_end_m = 0.0;
  double per = 0.0;

  bool operator==(const PerBin&) const = default;
};

/// Measured PER keyed by signed train position. Bins are half-open
/// [d_start_m, d_end_m), ordered and non-overlapping.
struct PerProfile {
  std::vector<PerBin> bins;

  void validate() const;
  std::optional<double> per_at(double train_position_m) const;

  /// CSV with header `d_start_m,d_end_m,per`.
  static PerProfile from_csv(std::istream& in);
  static PerProfile from_csv_file(const std::string& path);

  bool operator==(const PerProfile&) const = default;
};

enum class OutOfProfilePolicy { Error, ZeroSuccess };

struct EmpiricalLink {
  PerProfile profile;
  OutOfProfilePolicy out_of_profile = OutOfProfilePolicy::Error;

  bool operator==(const EmpiricalLink&) const = default;
};

/// Log-distance path loss with log-normal shadowing and a logistic
/// SNR-to-success curve. Defaults are conventional values, not measured ones.
struct SyntheticChannel {
  double path_loss_exponent = 2.7;
  double reference_loss_db = 47.82;  // free space at 1 m, 5.87 GHz
  double shadowing_sigma_db = 3.0;
  double noise_floor_dbm = -98.0;
  double qpsk_threshold_db = 8.0;
  double qam16_threshold_db = 15.0;
  /// SNR span over which success rises from 10% to 90%.
  double transition_width_db = 2.0;

  void validate() const;
  double threshold_db(Modulation m) const;

  bool operator==(const SyntheticChannel&) const = default;
};

using LinkSource = std::variant<EmpiricalLink, SyntheticChannel>;

/// 20 log10(4 pi f / c): free-space loss at 1 m.
double free_space_reference_loss_db(double frequency_hz);

/// reference + 10 n log10(range) + shadowing. Throws std::domain_error for range <= 0.
double path_loss_db(double range_m, const SyntheticChannel& channel, double shadowing_db = 0.0);

double mean_snr_db(const RadioConfig& radio, const SyntheticChannel& channel, double range_m,
                   double gain_dbi, double excess_loss_db, double shadowing_db = 0.0);

/// Logistic curve with value 0.5 at the threshold.
double success_from_snr(double snr_db, double threshold_db, double transition_width_db);

struct LinkInputs {
  double train_position_m = 0.0;
  double range_m = 0.0;
  double gain_dbi = 0.0;      // synthetic mode only
  double shadowing_db = 0.0;  // per-packet draw, synthetic mode only
};

/// Probability that one packet decodes. Empirical mode returns 1 - PER of
/// the bin holding the train and ignores gains and obstructions (the
/// measurement already contains them).
double packet_success_probability(const LinkSource& source, const RadioConfig& radio,
                                  const std::vector<geometry::ObstructionSegment>& obstructions,
                                  const LinkInputs& in);

struct LatencyModel {
  double processing_base_ms = 3.0;
  double processing_jitter_ms = 1.0;  // half-width of a uniform draw
  int relay_hops = 1;

  void validate() const;

  bool operator==(const LatencyModel&) const = default;
};

double propagation_delay_s(double range_m);

/// t_s = hops * (range / c) + sum over hops of (base + uniform jitter).
double latency_sample(double range_m, const LatencyModel& model, Rng& rng);

}  // namespace railwarn::link
