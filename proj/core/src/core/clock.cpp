#include "vibedaq/core/clock.hpp"

#include <cstdio>
#include <ctime>
#include <thread>

namespace vibedaq {

SystemClock::SystemClock()
    : steady0_(std::chrono::steady_clock::now()),
      epoch0_us_(static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::microseconds>(
              std::chrono::system_clock::now().time_since_epoch())
              .count())) {}

std::uint64_t SystemClock::now_us() {
  const auto dt = std::chrono::steady_clock::now() - steady0_;
  return epoch0_us_ +
         static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(dt).count());
}

void SystemClock::sleep_until(std::uint64_t t_us) {
  const auto target = steady0_ + std::chrono::microseconds(t_us > epoch0_us_ ? t_us - epoch0_us_ : 0);
  std::this_thread::sleep_until(target);
}

std::string format_utc(std::uint64_t epoch_us) {
  const auto secs = static_cast<std::time_t>(epoch_us / 1'000'000);
  const auto micros = static_cast<unsigned>(epoch_us % 1'000'000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06uZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, micros);
  return buf;
}

}  // namespace vibedaq
