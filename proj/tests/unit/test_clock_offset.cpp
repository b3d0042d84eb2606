#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "vibedaq/protocol/clock_offset.hpp"

using namespace vibedaq::proto;

namespace {

// One exchange between a requester and a responder whose clock reads
// `theta` ahead of the requester's.
TimesyncExchange exchange(std::int64_t t1, std::int64_t theta, std::int64_t d_fwd, std::int64_t d_back,
                          std::int64_t turnaround) {
  TimesyncExchange e;
  e.t1_us = t1;
  e.t2_us = t1 + d_fwd + theta;
  e.t3_us = e.t2_us + turnaround;
  e.t4_us = e.t3_us - theta + d_back;
  return e;
}

}  // namespace

TEST(EstimateOffset, SingleExchangeTruncatesTowardZero) {
  const std::vector<TimesyncExchange> ex{{0, 1005, 1010, 20}};
  const auto o = estimate_offset(ex);
  EXPECT_EQ(o.offset_us, 997);
  EXPECT_EQ(o.rtt_us, 15);
}

TEST(EstimateOffset, NegativeHalfTruncatesTowardZero) {
  const std::vector<TimesyncExchange> ex{{1010, 20, 25, 1035}};
  EXPECT_EQ(estimate_offset(ex).offset_us, -1000);
  const std::vector<TimesyncExchange> odd{{0, -1005, -1000, 10}};
  EXPECT_EQ(estimate_offset(odd).offset_us, -1007);  // -2015 / 2
}

TEST(EstimateOffset, ZeroDelayLoopback) {
  const std::vector<TimesyncExchange> ex{{500, 500, 500, 500}};
  EXPECT_EQ(estimate_offset(ex), (ClockOffset{0, 0}));
}

TEST(EstimateOffset, EmptyAndReversedAreErrors) {
  EXPECT_THROW(estimate_offset({}), OffsetError);
  const std::vector<TimesyncExchange> bad{{100, 0, 0, 99}};
  EXPECT_THROW(estimate_offset(bad), OffsetError);
}

TEST(EstimateOffset, MedianDiscardsInflatedRoundTrip) {
  std::vector<TimesyncExchange> ex;
  for (int i = 0; i < 7; ++i) ex.push_back(exchange(i * 10'000, 2'500'000, 400, 400, 30));
  ex.push_back(exchange(70'000, 2'500'000, 90'000, 300, 30));
  const auto o = estimate_offset(ex);

  std::vector<double> offsets, rtts;
  for (const auto& e : ex) {
    offsets.push_back(static_cast<double>(((e.t2_us - e.t1_us) + (e.t3_us - e.t4_us)) / 2));
    rtts.push_back(static_cast<double>((e.t4_us - e.t1_us) - (e.t3_us - e.t2_us)));
  }
  EXPECT_EQ(o.offset_us, static_cast<std::int64_t>(oracle::median(offsets)));
  EXPECT_EQ(o.rtt_us, static_cast<std::int64_t>(oracle::median(rtts)));
  EXPECT_EQ(o.offset_us, 2'500'000);
  EXPECT_EQ(o.rtt_us, 800);
}

TEST(EstimateOffset, MatchesBruteForceMedianOnRandomLists) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 15;
    std::vector<TimesyncExchange> ex;
    std::vector<double> offsets;
    for (std::size_t i = 0; i < n; ++i) {
      const auto theta = static_cast<std::int64_t>(rng() % 2'000'000) - 1'000'000;
      ex.push_back(exchange(static_cast<std::int64_t>(rng() % 1'000'000), theta,
                            static_cast<std::int64_t>(rng() % 5000),
                            static_cast<std::int64_t>(rng() % 5000), static_cast<std::int64_t>(rng() % 100)));
      const auto& e = ex.back();
      offsets.push_back(static_cast<double>(((e.t2_us - e.t1_us) + (e.t3_us - e.t4_us)) / 2));
    }
    const double m = oracle::median(offsets);
    // For even counts the library truncates the mean of the middle pair.
    EXPECT_EQ(estimate_offset(ex).offset_us, static_cast<std::int64_t>(m)) << trial;
  }
}

TEST(EstimateOffset, SwappingClockRolesNegatesOffset) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto theta = static_cast<std::int64_t>(rng() % 10'000'000) - 5'000'000;
    const auto d_fwd = static_cast<std::int64_t>(rng() % 20'000);
    const auto d_back = static_cast<std::int64_t>(rng() % 20'000);
    const auto turn = static_cast<std::int64_t>(rng() % 500);
    const auto t1 = static_cast<std::int64_t>(rng() % 100'000'000);
    const std::vector<TimesyncExchange> ab{exchange(t1, theta, d_fwd, d_back, turn)};
    // From the other side the forward and return paths trade places.
    const std::vector<TimesyncExchange> ba{exchange(t1 + theta, -theta, d_back, d_fwd, turn)};
    EXPECT_EQ(estimate_offset(ba).offset_us, -estimate_offset(ab).offset_us);
    EXPECT_EQ(estimate_offset(ba).rtt_us, estimate_offset(ab).rtt_us);
  }
}

TEST(ClockOffset, MapsBetweenClocks) {
  const ClockOffset o{250, 10};
  EXPECT_EQ(o.to_master(1250), 1000);
  EXPECT_EQ(o.to_local(1000), 1250);
}
