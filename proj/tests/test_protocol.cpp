#include <random>
#include <stdexcept>

#include "doctest.h"
#include "railwarn/error.hpp"
#include "railwarn/protocol.hpp"

using namespace railwarn;
using namespace railwarn::protocol;
using doctest::Approx;

namespace {

BsmMessage at(std::uint32_t seq, double position) {
  BsmMessage m;
  m.message_count = seq;
  m.gps_position_m = position;
  return m;
}

}  // namespace

TEST_CASE("BSM serialization is 99 bytes and round-trips") {
  BsmMessage m;
  m.message_count = 0xDEADBEEF;
  m.train_id = 0x0123456789ABCDEFULL;
  m.gps_position_m = -321.125;
  m.speed_mps = 4.4704F;
  m.heading_deg = 270.5F;
  m.acceleration_mps2 = -0.25F;
  m.brake_status = true;
  m.tx_timestamp_us = 123456789012ULL;

  const auto bytes = serialize(m);
  CHECK(bytes.size() == 99);
  CHECK(bytes.size() == kBsmWireSize);
  CHECK(bytes[0] == 0xEF);  // little-endian count
  CHECK(bytes[3] == 0xDE);
  CHECK(deserialize(bytes) == m);

  std::vector<std::uint8_t> short_buf(bytes.begin(), bytes.begin() + 50);
  CHECK_THROWS_AS(deserialize(short_buf), std::invalid_argument);
}

TEST_CASE("generate_bsm") {
  TrainState train;
  train.position_m = -500.0;
  train.speed_mps = 4.4704;
  const auto m0 = generate_bsm(train, 0, 0.0);
  CHECK(m0.message_count == 0);
  CHECK(m0.gps_position_m == -500.0);
  CHECK(m0.tx_timestamp_us == 0);
  CHECK(m0.speed_mps == Approx(4.4704));

  train.position_m = -500.0 + 4.4704 * 0.05;
  const auto m1 = generate_bsm(train, 1, 0.05);
  CHECK(m1.message_count == 1);
  CHECK(m1.tx_timestamp_us == 50000);
  CHECK(m1.gps_position_m == Approx(-499.77648));
}

TEST_CASE("mode_for") {
  CHECK(mode_for(geometry::ReceiverKind::RSU) == WarningMode::Indirect);
  CHECK(mode_for(geometry::ReceiverKind::OBU) == WarningMode::Direct);
}

TEST_CASE("receiver_ingest fires on the K-th distinct packet") {
  TriggerPolicy policy;
  ReceiverState st("rsu", geometry::ReceiverKind::RSU);
  for (std::uint32_t i = 0; i < 4; ++i) {
    CHECK_FALSE(receiver_ingest(at(i, -500.0 + i), 0.05 * i, st, policy).has_value());
  }
  // Duplicate does not count.
  CHECK_FALSE(receiver_ingest(at(3, -497.0), 0.2, st, policy).has_value());
  const auto ev = receiver_ingest(at(4, -496.0), 0.2, st, policy);
  REQUIRE(ev.has_value());
  CHECK(ev->mode == WarningMode::Indirect);
  CHECK(ev->warning_distance_m() == Approx(496.0));
  CHECK(ev->packets_seen == 5);
  // Edge-triggered.
  CHECK_FALSE(receiver_ingest(at(5, -495.0), 0.25, st, policy).has_value());
  CHECK_FALSE(st.warning_failed());
  CHECK(st.received == 6);
}

TEST_CASE("receiver_ingest: too few packets means warning failure") {
  TriggerPolicy policy;
  ReceiverState st("obu", geometry::ReceiverKind::OBU);
  for (std::uint32_t i = 0; i < 3; ++i) receiver_ingest(at(i, -100.0), 0.05 * i, st, policy);
  CHECK(st.warning_failed());
}

TEST_CASE("receiver_ingest ignores a receding train and far packets") {
  TriggerPolicy policy;
  ReceiverState st("obu", geometry::ReceiverKind::OBU);
  for (std::uint32_t i = 0; i < 20; ++i) receiver_ingest(at(i, 10.0 + i), 0.05 * i, st, policy);
  CHECK(st.warning_failed());

  ReceiverState far("obu", geometry::ReceiverKind::OBU);
  for (std::uint32_t i = 0; i < 20; ++i) receiver_ingest(at(i, -1500.0), 0.05 * i, far, policy);
  CHECK(far.warning_failed());
}

TEST_CASE("receiver_ingest window drops stale packets") {
  TriggerPolicy policy;
  policy.window_s = 1.0;
  ReceiverState st("rsu", geometry::ReceiverKind::RSU);
  // One packet every 2 s never accumulates K inside a 1 s window.
  for (std::uint32_t i = 0; i < 20; ++i) receiver_ingest(at(i, -800.0 + i), 2.0 * i, st, policy);
  CHECK(st.warning_failed());
}

TEST_CASE("receiver_ingest counts reordering") {
  TriggerPolicy policy;
  ReceiverState st("rsu", geometry::ReceiverKind::RSU);
  receiver_ingest(at(0, -100.0), 0.0, st, policy);
  receiver_ingest(at(2, -99.0), 0.1, st, policy);
  receiver_ingest(at(1, -99.5), 0.11, st, policy);
  CHECK(st.reordered == 1);
  CHECK(st.received == 3);
}

TEST_CASE("property: raising K never triggers earlier") {
  std::mt19937_64 gen(99);
  std::bernoulli_distribution keep(0.6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BsmMessage> stream;
    for (std::uint32_t i = 0; i < 400; ++i) {
      if (keep(gen)) stream.push_back(at(i, -800.0 + 2.0 * i));
    }
    std::optional<double> prev;
    for (int k = 1; k <= 10; ++k) {
      TriggerPolicy policy;
      policy.reliability_threshold = k;
      ReceiverState st("rsu", geometry::ReceiverKind::RSU);
      std::optional<double> t;
      for (const auto& m : stream) {
        if (auto ev = receiver_ingest(m, 0.05 * m.message_count, st, policy)) t = ev->trigger_time_s;
      }
      if (k > 1 && !prev) CHECK_FALSE(t.has_value());
      if (prev && t) CHECK(*t >= *prev);
      prev = t;
      if (!t) break;
    }
  }
}

TEST_CASE("rsu_relay adds one hop") {
  WarningEvent ev;
  ev.mode = WarningMode::Indirect;
  ev.trigger_time_s = 10.0;
  link::LatencyModel model{4.0, 0.0, 2};
  Rng rng(1);
  CHECK(rsu_relay(ev, model, rng, 0.0) == Approx(10.004));

  ev.mode = WarningMode::Direct;
  CHECK_THROWS_AS(rsu_relay(ev, model, rng, 0.0), std::invalid_argument);
}

TEST_CASE("TriggerPolicy validation") {
  TriggerPolicy p;
  p.reliability_threshold = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.window_s = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
