#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace vibedaq {

/// Microsecond clock used for timestamps and deadline scheduling.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::uint64_t now_us() = 0;
  virtual void sleep_until(std::uint64_t t_us) = 0;
};

/// Unix-epoch microseconds that never step backwards: anchored to the system
/// clock once, then advanced by the steady clock.
class SystemClock final : public Clock {
 public:
  SystemClock();
  std::uint64_t now_us() override;
  void sleep_until(std::uint64_t t_us) override;

 private:
  std::chrono::steady_clock::time_point steady0_;
  std::uint64_t epoch0_us_;
};

/// ISO 8601 UTC rendering with microseconds, e.g. 2025-01-01T00:00:02.000000Z.
std::string format_utc(std::uint64_t epoch_us);

}  // namespace vibedaq
