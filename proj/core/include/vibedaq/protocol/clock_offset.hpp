#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace vibedaq::proto {

/// One request/response round trip. t1 and t4 are read on the master clock,
/// t2 and t3 on the slave clock.
struct TimesyncExchange {
  std::int64_t t1_us = 0;
  std::int64_t t2_us = 0;
  std::int64_t t3_us = 0;
  std::int64_t t4_us = 0;
};

/// offset_us is slave clock minus master clock, so a slave timestamp maps to
/// master time as t_local - offset_us.
struct ClockOffset {
  std::int64_t offset_us = 0;
  std::int64_t rtt_us = 0;

  std::int64_t to_master(std::int64_t t_local_us) const { return t_local_us - offset_us; }
  std::int64_t to_local(std::int64_t t_master_us) const { return t_master_us + offset_us; }

  friend bool operator==(const ClockOffset&, const ClockOffset&) = default;
};

class OffsetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Median over exchanges of ((t2 - t1) + (t3 - t4)) / 2 and of
/// (t4 - t1) - (t3 - t2). Divisions truncate toward zero; an even number of
/// exchanges takes the truncated mean of the two middle values.
ClockOffset estimate_offset(std::span<const TimesyncExchange> exchanges);

}  // namespace vibedaq::proto
