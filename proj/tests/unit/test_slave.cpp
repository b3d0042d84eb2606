#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <random>
#include <set>
#include <thread>

#include "vibedaq/sensorbus/bus.hpp"
#include "vibedaq/slave/acquisition.hpp"
#include "vibedaq/slave/acquisition_buffer.hpp"
#include "vibedaq/slave/slave_node.hpp"
#include "vibedaq/slave/state_machine.hpp"

using namespace vibedaq;
using namespace vibedaq::slave;

namespace {

class ManualClock final : public Clock {
 public:
  std::uint64_t now_us() override { return t; }
  void sleep_until(std::uint64_t until) override { t = std::max(t, until); }
  std::uint64_t t = 0;
};

AcquisitionConfig config(std::uint32_t duration_s = 60) {
  AcquisitionConfig c;
  c.run_id = 1;
  c.duration_s = duration_s;
  return c;
}

proto::Ack only_ack(const SlaveActions& a) {
  EXPECT_EQ(a.replies.size(), 1u);
  return std::get<proto::Ack>(a.replies.at(0));
}

SampleRecord rec(std::uint32_t seq) { return {seq, 1000ull * seq, {1, 2, 3}}; }

}  // namespace

TEST(StateMachine, ValidConfigFromIdle) {
  SlaveStateMachine sm;
  const auto a = sm.handle(proto::Config{config()});
  EXPECT_EQ(sm.state(), SlaveState::Configured);
  EXPECT_EQ(only_ack(a), (proto::Ack{proto::MsgType::Config, proto::kAckOk}));
}

TEST(StateMachine, InvalidConfigLeavesStateUnchanged) {
  SlaveStateMachine sm;
  auto bad = config();
  bad.odr_hz = 200.0;
  const auto a = sm.handle(proto::Config{bad});
  EXPECT_EQ(sm.state(), SlaveState::Idle);
  EXPECT_EQ(only_ack(a).status, proto::kAckError);
  EXPECT_FALSE(sm.config().has_value());
}

TEST(StateMachine, StartFromIdleIsRejected) {
  SlaveStateMachine sm;
  const auto a = sm.handle(proto::Start{123});
  EXPECT_EQ(sm.state(), SlaveState::Idle);
  EXPECT_EQ(only_ack(a), (proto::Ack{proto::MsgType::Start, proto::kAckError}));
  EXPECT_FALSE(a.arm_at_local_us.has_value());
}

TEST(StateMachine, FullLifecycle) {
  SlaveStateMachine sm;
  sm.handle(proto::Config{config()});
  const auto armed = sm.handle(proto::Start{5'000});
  EXPECT_EQ(sm.state(), SlaveState::Armed);
  EXPECT_EQ(armed.arm_at_local_us, 5'000u);
  sm.on_start_reached();
  EXPECT_EQ(sm.state(), SlaveState::Acquiring);
  const auto stop = sm.handle(proto::Stop{});
  EXPECT_TRUE(stop.begin_drain);
  EXPECT_EQ(sm.state(), SlaveState::Draining);
  EXPECT_EQ(only_ack(sm.handle(proto::Config{config()})).status, proto::kAckError);
  EXPECT_EQ(sm.state(), SlaveState::Draining);
  sm.on_drained();
  EXPECT_EQ(sm.state(), SlaveState::Idle);
}

TEST(StateMachine, NoSequenceReachesAcquiringWithoutValidConfigAndStart) {
  std::mt19937_64 rng(99);
  auto invalid = config();
  invalid.range_g = 5;
  for (int trial = 0; trial < 5000; ++trial) {
    SlaveStateMachine sm;
    bool valid_config = false;
    bool started = false;
    for (int step = 0; step < 12; ++step) {
      switch (rng() % 8) {
        case 0: {
          const auto before = sm.state();
          sm.handle(proto::Config{config()});
          if (before == SlaveState::Idle || before == SlaveState::Configured) valid_config = true;
          break;
        }
        case 1: sm.handle(proto::Config{invalid}); break;
        case 2:
          if (sm.state() == SlaveState::Configured) started = true;
          sm.handle(proto::Start{1});
          break;
        case 3: sm.handle(proto::Stop{}); break;
        case 4: sm.on_start_reached(); break;
        case 5: sm.on_acquisition_finished(); break;
        case 6:
          if (sm.state() == SlaveState::Draining) valid_config = started = false;
          sm.on_drained();
          break;
        default:
          sm.abort();
          valid_config = started = false;
          break;
      }
      if (sm.state() == SlaveState::Acquiring) {
        ASSERT_TRUE(valid_config && started) << "trial " << trial;
        ASSERT_TRUE(validate_config(*sm.config()).empty());
      }
    }
  }
}

TEST(Buffer, OverflowDropsOldestAndLogsOneGapPerRange) {
  AcquisitionBuffer b({0, 1}, 100);
  for (std::uint32_t s = 0; s < 130; ++s) b.push(0, rec(s));
  EXPECT_EQ(b.dropped(), 30u);
  EXPECT_EQ(b.occupancy(0), 100u);
  ASSERT_EQ(b.gaps().size(), 1u);
  EXPECT_EQ(b.gaps()[0], (GapRecord{0, 0, 30}));

  // Drain some, overflow again: a second, separate range.
  auto batch = b.take_batch(64);
  ASSERT_TRUE(batch);
  EXPECT_EQ(batch->records.front().seq, 30u);
  for (std::uint32_t s = 130; s < 200; ++s) b.push(0, rec(s));
  EXPECT_EQ(b.dropped(), 36u);
  ASSERT_EQ(b.gaps().size(), 2u);
  EXPECT_EQ(b.gaps()[1], (GapRecord{0, 94, 6}));
}

TEST(Buffer, OccupancyNeverExceedsCapacity) {
  std::mt19937_64 rng(4);
  AcquisitionBuffer b({0, 1, 2}, 50);
  std::uint32_t seq[3] = {};
  std::uint64_t pushed = 0, taken = 0;
  for (int i = 0; i < 20000; ++i) {
    if (rng() % 3) {
      const auto m = static_cast<std::uint8_t>(rng() % 3);
      b.push(m, rec(seq[m]++));
      ++pushed;
    } else if (auto batch = b.take_batch(1 + rng() % 64)) {
      taken += batch->records.size();
    }
    ASSERT_LE(b.occupancy(), 150u);
    for (std::uint8_t m = 0; m < 3; ++m) ASSERT_LE(b.occupancy(m), 50u);
  }
  std::uint64_t gap_total = 0;
  for (const auto& g : b.gaps()) gap_total += g.length;
  EXPECT_EQ(gap_total, b.dropped());
  EXPECT_EQ(pushed, taken + b.dropped() + b.occupancy());
  EXPECT_LE(b.high_watermark(), 150u);
}

TEST(Buffer, RestorePutsBatchBackInOrder) {
  AcquisitionBuffer b({0}, 200);
  for (std::uint32_t s = 0; s < 100; ++s) b.push(0, rec(s));
  auto batch = b.take_batch(64);
  b.push(0, rec(100));
  b.restore(std::move(*batch));
  std::vector<std::uint32_t> seqs;
  while (auto x = b.take_batch(64)) {
    for (const auto& r : x->records) seqs.push_back(r.seq);
  }
  ASSERT_EQ(seqs.size(), 101u);
  for (std::uint32_t i = 0; i < 101; ++i) EXPECT_EQ(seqs[i], i);
  EXPECT_EQ(b.dropped(), 0u);
}

TEST(Buffer, TakesOldestSensorFirst) {
  AcquisitionBuffer b({0, 1}, 10);
  b.push(1, {0, 100, {}});
  b.push(0, {0, 200, {}});
  EXPECT_EQ(b.take_batch(64)->mux_channel, 1);
  EXPECT_EQ(b.take_batch(64)->mux_channel, 0);
  EXPECT_FALSE(b.take_batch(64).has_value());
}

TEST(Buffer, ProducerNeverBlocksOnSlowConsumer) {
  AcquisitionBuffer b({0}, 1000);
  std::atomic<bool> done{false};
  std::thread consumer([&] {
    while (!done.load()) {
      if (b.take_batch(64)) std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  });
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint32_t s = 0; s < 200000; ++s) b.push(0, rec(s));
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  done = true;
  consumer.join();
  EXPECT_LT(elapsed, std::chrono::seconds(5));
  EXPECT_GT(b.dropped(), 0u);
}

TEST(Acquisition, TaxiRunIsTwelveThousandFourHundredEightyTicks) {
  bus::VirtualBus vbus(bus::tvt_preset(), {0, 1, 2}, 1);
  ManualClock clock;
  clock.t = 10'000'000;
  std::map<std::uint8_t, std::vector<SampleRecord>> got;
  std::atomic<bool> stop{false};
  const auto summary = run_acquisition(
      config(), vbus, {0, 1, 2}, clock,
      [&](std::uint8_t mux, const SampleRecord& r) { got[mux].push_back(r); }, stop, 10'000'000);
  EXPECT_EQ(summary.ticks, 12480u);
  EXPECT_FALSE(summary.stopped_early);
  ASSERT_EQ(got.size(), 3u);
  for (auto& [mux, recs] : got) {
    ASSERT_EQ(recs.size(), 12480u);
    for (std::uint32_t k = 0; k < recs.size(); ++k) ASSERT_EQ(recs[k].seq, k);
  }
  for (const auto& s : summary.sensors) {
    EXPECT_NEAR(s.mean_interval_us(), 1e6 / 208.0, 1e6 / 208.0 * 0.005);
  }
  EXPECT_EQ(summary.max_lateness_us, 0u);
}

TEST(Acquisition, DeadlineGridDoesNotAccumulateJitter) {
  bus::VirtualBus vbus(bus::tvt_preset(), {0}, 1);

  // Each read is late by a random amount; deadlines stay on the grid.
  class JitterClock final : public Clock {
   public:
    std::uint64_t now_us() override { return t; }
    void sleep_until(std::uint64_t until) override { t = std::max(t, until) + rng() % 900; }
    std::uint64_t t = 0;
    std::mt19937_64 rng{8};
  } clock;

  AcquisitionLoop loop(vbus, {0}, config(20), 0);
  loop.configure_sensors();
  std::vector<std::uint64_t> ts;
  while (auto due = loop.next_deadline()) {
    clock.sleep_until(*due);
    loop.poll_tick(clock, [&](std::uint8_t, const SampleRecord& r) { ts.push_back(r.t_local_us); });
  }
  ASSERT_EQ(ts.size(), 208u * 20u);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    ASSERT_GE(ts[k], loop.deadline(k));
    ASSERT_LT(ts[k], loop.deadline(k) + 900);
  }
  const auto s = loop.summary();
  EXPECT_NEAR(s.sensors[0].mean_interval_us(), 1e6 / 208.0, 1e6 / 208.0 * 0.005);
}

TEST(Acquisition, MissingSensorIsMarkedFailedOthersContinue) {
  bus::VirtualBus vbus(bus::tvt_preset(), {0, 1, 2}, 1);
  ManualClock clock;
  AcquisitionLoop loop(vbus, {0, 1, 2}, config(2), 0);
  EXPECT_EQ(loop.configure_sensors(), 3u);
  std::map<std::uint8_t, int> counts;
  int k = 0;
  while (auto due = loop.next_deadline()) {
    clock.sleep_until(*due);
    if (k++ == 100) vbus.detach(1);
    loop.poll_tick(clock, [&](std::uint8_t m, const SampleRecord&) { ++counts[m]; });
  }
  const auto s = loop.summary();
  EXPECT_EQ(s.ticks, 416u);
  EXPECT_EQ(counts[0], 416);
  EXPECT_EQ(counts[1], 100);
  EXPECT_EQ(counts[2], 416);
  EXPECT_TRUE(s.sensors[1].failed);
  EXPECT_FALSE(s.sensors[0].failed);
}

TEST(Acquisition, NineChannelsPerSlaveEighteenAcrossTwo) {
  std::set<std::string> labels;
  for (std::uint8_t slave = 1; slave <= 2; ++slave) {
    for (std::uint8_t mux = 0; mux < 3; ++mux) {
      for (auto a : kAxes) labels.insert(channel_label({slave, mux, a}));
    }
  }
  EXPECT_EQ(labels.size(), 18u);
}

TEST(Acquisition, StopEndsRunEarly) {
  bus::VirtualBus vbus(bus::tvt_preset(), {0}, 1);
  ManualClock clock;
  std::atomic<bool> stop{false};
  std::uint64_t n = 0;
  const auto s = run_acquisition(
      config(), vbus, {0}, clock,
      [&](std::uint8_t, const SampleRecord&) {
        if (++n == 500) stop = true;
      },
      stop, 0);
  EXPECT_EQ(s.ticks, 500u);
  EXPECT_TRUE(s.stopped_early);
}

TEST(Node, BatchesAreAtMostSixtyFourRecords) {
  bus::VirtualBus vbus(bus::tvt_preset(), {0}, 1);
  ManualClock clock;
  SlaveOptions opts;
  opts.mux_channels = {0};
  opts.heartbeat_interval_us = 1'000'000'000;
  SlaveNode node(opts, vbus);
  node.on_message(proto::Config{config(1)}, clock);
  node.on_message(proto::Start{0}, clock);
  for (int k = 0; k < 130; ++k) {
    clock.sleep_until(*node.next_deadline());
    node.poll(clock);
  }
  ASSERT_TRUE(std::holds_alternative<proto::Heartbeat>(*node.next_outbound(clock.t)));
  node.sent();
  std::vector<std::size_t> sizes;
  while (auto m = node.next_outbound(clock.t)) {
    if (const auto* b = std::get_if<proto::DataBatch>(&*m)) sizes.push_back(b->records.size());
    node.sent();
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{64, 64, 2}));
}

TEST(Node, StopDrainsThenSendsRunEnd) {
  bus::VirtualBus vbus(bus::tvt_preset(), {0, 1}, 1);
  ManualClock clock;
  SlaveOptions opts;
  opts.mux_channels = {0, 1};
  SlaveNode node(opts, vbus);
  node.on_message(proto::Config{config()}, clock);
  node.on_message(proto::Start{1000}, clock);
  for (int k = 0; k < 300; ++k) {
    clock.sleep_until(*node.next_deadline());
    node.poll(clock);
  }
  EXPECT_EQ(node.state(), SlaveState::Acquiring);
  EXPECT_TRUE(node.on_message(proto::Stop{}, clock).empty());
  EXPECT_EQ(node.state(), SlaveState::Draining);
  EXPECT_FALSE(node.next_deadline().has_value());

  std::map<std::uint8_t, std::uint32_t> next_seq;
  std::optional<proto::RunEnd> end;
  while (auto m = node.next_outbound(clock.t)) {
    if (const auto* b = std::get_if<proto::DataBatch>(&*m)) {
      ASSERT_FALSE(end.has_value());
      ASSERT_EQ(b->seq_first, next_seq[b->mux_channel]);
      next_seq[b->mux_channel] += static_cast<std::uint32_t>(b->records.size());
    } else if (const auto* e = std::get_if<proto::RunEnd>(&*m)) {
      end = *e;
    }
    node.sent();
  }
  ASSERT_TRUE(end.has_value());
  EXPECT_EQ(end->total_samples, 300u);
  EXPECT_EQ(next_seq[0], 300u);
  EXPECT_EQ(next_seq[1], 300u);
  EXPECT_EQ(node.state(), SlaveState::Idle);
}

TEST(Node, FailedSendIsRetriedWithoutLoss) {
  bus::VirtualBus vbus(bus::tvt_preset(), {0}, 1);
  ManualClock clock;
  SlaveOptions opts;
  opts.mux_channels = {0};
  opts.heartbeat_interval_us = 1'000'000'000;
  SlaveNode node(opts, vbus);
  node.on_message(proto::Config{config(1)}, clock);
  node.on_message(proto::Start{0}, clock);
  std::vector<std::uint32_t> seqs;
  std::mt19937_64 rng(6);
  bool ended = false;
  while (!ended) {
    if (auto due = node.next_deadline()) {
      clock.sleep_until(*due);
      node.poll(clock);
    }
    while (auto m = node.next_outbound(clock.t)) {
      if (rng() % 3 == 0) {
        node.send_failed();
        break;
      }
      if (const auto* b = std::get_if<proto::DataBatch>(&*m)) {
        for (std::uint32_t i = 0; i < b->records.size(); ++i) seqs.push_back(b->seq_first + i);
      }
      ended = std::holds_alternative<proto::RunEnd>(*m);
      node.sent();
    }
    if (!node.next_deadline()) clock.t += 20'000;
  }
  ASSERT_EQ(seqs.size(), 208u);
  for (std::uint32_t i = 0; i < 208; ++i) EXPECT_EQ(seqs[i], i);
}

TEST(Node, AnswersTimesyncWithLocalTimestamps) {
  bus::VirtualBus vbus;
  ManualClock clock;
  clock.t = 777;
  SlaveNode node({}, vbus);
  const auto r = node.on_message(proto::TimesyncReq{42}, clock);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(std::get<proto::TimesyncResp>(r[0]), (proto::TimesyncResp{42, 777, 777}));
}
