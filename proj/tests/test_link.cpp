#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "railwarn/error.hpp"
#include "railwarn/link.hpp"

using namespace railwarn;
using namespace railwarn::link;
using doctest::Approx;

TEST_CASE("radio defaults and validation") {
  RadioConfig r;
  CHECK(r.center_frequency_hz == 5.87e9);
  CHECK(r.channel_number == 174);
  CHECK(r.packet_size_bytes == 99);
  CHECK(r.tx_period_ms == 50.0);
  CHECK_NOTHROW(r.validate());
  r.tx_power_dbm = 11;
  CHECK_NOTHROW(r.validate());
  r.tx_power_dbm = 30;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  CHECK_NOTHROW(r.validate({30.0}));
  r.tx_power_dbm = 23;
  r.tx_period_ms = 0;
  CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("path_loss_db") {
  // Friis oracle at 1 m.
  const double c = 299792458.0;
  const double friis = 20.0 * std::log10(4.0 * std::numbers::pi * 1.0 * 5.87e9 / c);
  CHECK(free_space_reference_loss_db(5.87e9) == Approx(friis));
  CHECK(SyntheticChannel{}.reference_loss_db == Approx(friis).epsilon(1e-4));

  SyntheticChannel ch;
  ch.path_loss_exponent = 2.0;
  ch.reference_loss_db = 47.86;
  CHECK(path_loss_db(1.0, ch) == Approx(47.86));
  CHECK(path_loss_db(100.0, ch) - path_loss_db(10.0, ch) == Approx(20.0));
  ch.path_loss_exponent = 2.5;
  CHECK(path_loss_db(200.0, ch) == Approx(105.4).epsilon(1e-3));
  CHECK(path_loss_db(200.0, ch, 4.0) == Approx(path_loss_db(200.0, ch) + 4.0));
  CHECK_THROWS_AS(path_loss_db(0.0, ch), std::domain_error);
}

TEST_CASE("synthetic channel validation") {
  SyntheticChannel ch;
  CHECK_NOTHROW(ch.validate());
  ch.qam16_threshold_db = ch.qpsk_threshold_db;
  CHECK_THROWS_AS(ch.validate(), ConfigError);
  ch = {};
  ch.shadowing_sigma_db = -1.0;
  CHECK_THROWS_AS(ch.validate(), ConfigError);
  ch = {};
  ch.path_loss_exponent = 1.5;
  CHECK_THROWS_AS(ch.validate(), ConfigError);
}

TEST_CASE("success_from_snr") {
  CHECK(success_from_snr(8.0, 8.0, 2.0) == Approx(0.5));
  CHECK(success_from_snr(9.0, 8.0, 2.0) == Approx(0.9));
  CHECK(success_from_snr(7.0, 8.0, 2.0) == Approx(0.1));
  CHECK(success_from_snr(40.0, 8.0, 2.0) > 0.999999);
}

TEST_CASE("empirical packet_success_probability") {
  PerProfile prof;
  prof.bins = {{-1000.0, -500.0, 1.0}, {-500.0, 0.0, 0.0}, {0.0, 500.0, 0.25}};
  REQUIRE_NOTHROW(prof.validate());
  const LinkSource src = EmpiricalLink{prof, OutOfProfilePolicy::Error};
  const RadioConfig radio;
  LinkInputs in;

  in.train_position_m = -300.0;
  CHECK(packet_success_probability(src, radio, {}, in) == 1.0);
  in.train_position_m = -500.0;
  CHECK(packet_success_probability(src, radio, {}, in) == 1.0);
  in.train_position_m = -500.1;
  CHECK(packet_success_probability(src, radio, {}, in) == 0.0);
  in.train_position_m = 100.0;
  CHECK(packet_success_probability(src, radio, {}, in) == 0.75);

  // Gains are ignored in empirical mode.
  in.gain_dbi = -100.0;
  CHECK(packet_success_probability(src, radio, {}, in) == 0.75);

  in.train_position_m = 600.0;
  CHECK_THROWS_AS(packet_success_probability(src, radio, {}, in), std::out_of_range);
  const LinkSource lenient = EmpiricalLink{prof, OutOfProfilePolicy::ZeroSuccess};
  CHECK(packet_success_probability(lenient, radio, {}, in) == 0.0);
}

TEST_CASE("PER profile CSV and validation") {
  std::istringstream ok("d_start_m,d_end_m,per\n-100,-50,0.5\n-50,0,0\n");
  const auto p = PerProfile::from_csv(ok);
  CHECK(p.bins.size() == 2);
  CHECK(*p.per_at(-75.0) == 0.5);
  CHECK_FALSE(p.per_at(0.0).has_value());

  std::istringstream overlap("d_start_m,d_end_m,per\n-100,-40,0.5\n-50,0,0\n");
  CHECK_THROWS_AS(PerProfile::from_csv(overlap), ConfigError);
  std::istringstream bad_per("d_start_m,d_end_m,per\n-100,-40,1.5\n");
  CHECK_THROWS_AS(PerProfile::from_csv(bad_per), ConfigError);
  std::istringstream bad_num("d_start_m,d_end_m,per\n-100,abc,0.5\n");
  CHECK_THROWS_AS(PerProfile::from_csv(bad_num), ConfigError);
}

TEST_CASE("synthetic probability at threshold is one half") {
  SyntheticChannel ch;
  ch.path_loss_exponent = 2.0;
  RadioConfig radio;
  LinkInputs in;
  in.range_m = 100.0;
  in.gain_dbi = 18.0;
  // Choose the noise floor so the mean SNR lands exactly on the QPSK threshold.
  ch.noise_floor_dbm = radio.tx_power_dbm + in.gain_dbi - path_loss_db(100.0, ch) -
                       ch.qpsk_threshold_db;
  CHECK(mean_snr_db(radio, ch, 100.0, 18.0, 0.0) == Approx(ch.qpsk_threshold_db));
  CHECK(packet_success_probability(ch, radio, {}, in) == Approx(0.5));
}

TEST_CASE("property: synthetic success is monotone in loss and modulation") {
  SyntheticChannel ch;
  RadioConfig qpsk;
  RadioConfig qam = qpsk;
  qam.modulation = Modulation::QAM16;
  geometry::ObstructionSegment block{-300.0, -100.0, 0.0, std::nullopt};

  double prev_range_p = 1.0;
  for (double r = 10.0; r <= 3000.0; r += 10.0) {
    LinkInputs in;
    in.train_position_m = -r;
    in.range_m = r;
    in.gain_dbi = 18.0;
    const double pq = packet_success_probability(ch, qpsk, {}, in);
    const double p16 = packet_success_probability(ch, qam, {}, in);
    CHECK(p16 <= pq);
    CHECK(pq <= prev_range_p);
    prev_range_p = pq;
  }

  LinkInputs in;
  in.train_position_m = -200.0;
  in.range_m = 1500.0;
  in.gain_dbi = 18.0;
  double prev = 1.0;
  for (double loss = 0.0; loss <= 40.0; loss += 2.0) {
    block.excess_loss_db = loss;
    const double p = packet_success_probability(ch, qpsk, {block}, in);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("latency_sample") {
  Rng rng(3);
  LatencyModel zero{0.0, 0.0, 1};
  CHECK(latency_sample(0.0, zero, rng) == 0.0);

  LatencyModel fixed{4.0, 0.0, 1};
  CHECK(latency_sample(200.0, fixed, rng) == Approx(0.004 + 200.0 / 299792458.0));
  CHECK(latency_sample(200.0, fixed, rng) * 1e3 == Approx(4.000667).epsilon(1e-7));
  CHECK(propagation_delay_s(300.0) < 1.01e-6);

  LatencyModel jitter{4.0, 1.0, 1};
  for (int i = 0; i < 10000; ++i) {
    const double s = latency_sample(100.0, jitter, rng);
    CHECK(s >= 0.003);
    CHECK(s <= 0.005 + 1e-6);
  }

  LatencyModel two_hops{4.0, 0.0, 2};
  CHECK(latency_sample(0.0, two_hops, rng) == Approx(0.008));

  LatencyModel defaults;
  for (int i = 0; i < 10000; ++i) CHECK(latency_sample(500.0, defaults, rng) < 0.050);

  CHECK_THROWS_AS((LatencyModel{1.0, 2.0, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((LatencyModel{1.0, 0.0, 3}.validate()), ConfigError);
}

TEST_CASE("Rng streams are reproducible and independent of each other") {
  Rng a = Rng::stream(42, "receiver:rsu");
  Rng b = Rng::stream(42, "receiver:rsu");
  Rng c = Rng::stream(42, "receiver:obu");
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    if (x != c.uniform()) differs = true;
  }
  CHECK(differs);

  Rng n(5);
  double sum = 0.0;
  double sq = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double z = n.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / N) < 0.01);
  CHECK(std::abs(sq / N - 1.0) < 0.02);
}
