#include "vibedaq/protocol/clock_offset.hpp"

#include <algorithm>
#include <vector>

namespace vibedaq::proto {

namespace {

std::int64_t median(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2;
}

}  // namespace

ClockOffset estimate_offset(std::span<const TimesyncExchange> exchanges) {
  if (exchanges.empty()) throw OffsetError("estimate_offset: no exchanges");
  std::vector<std::int64_t> offsets;
  std::vector<std::int64_t> rtts;
  offsets.reserve(exchanges.size());
  rtts.reserve(exchanges.size());
  for (const auto& e : exchanges) {
    if (e.t4_us < e.t1_us) throw OffsetError("estimate_offset: t4 precedes t1");
    offsets.push_back(((e.t2_us - e.t1_us) + (e.t3_us - e.t4_us)) / 2);
    rtts.push_back((e.t4_us - e.t1_us) - (e.t3_us - e.t2_us));
  }
  return {median(std::move(offsets)), median(std::move(rtts))};
}

}  // namespace vibedaq::proto
