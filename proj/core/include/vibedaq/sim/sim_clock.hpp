#pragma once

#include <cstdint>
#include <span>

#include "vibedaq/core/clock.hpp"
#include "vibedaq/sensorbus/bus.hpp"

namespace vibedaq::sim {

/// A slave oscillator as seen from true simulation time: constant offset
/// plus linear drift. local(T) = T + offset + drift * (T - epoch).
struct OscillatorModel {
  std::uint64_t epoch_us = 0;
  std::int64_t offset_us = 0;
  double drift_ppm = 0.0;

  std::uint64_t local(std::uint64_t true_us) const;
  /// Earliest true time whose local reading is at least `local_us`.
  std::uint64_t true_time(std::uint64_t local_us) const;
};

/// Clock handed to a simulated slave. Reads the world time set by the event
/// loop plus any bus time spent inside the current event.
class SimClock final : public Clock {
 public:
  explicit SimClock(OscillatorModel model) : model_(model) {}

  void set_true(std::uint64_t true_us) {
    true_us_ = true_us;
    busy_us_ = 0;
  }
  void spend(std::uint64_t us) { busy_us_ += us; }
  std::uint64_t true_now() const { return true_us_ + busy_us_; }

  std::uint64_t now_us() override { return model_.local(true_now()); }
  /// Simulated activities never block; the event loop owns time.
  void sleep_until(std::uint64_t) override {}

  const OscillatorModel& model() const { return model_; }

 private:
  OscillatorModel model_;
  std::uint64_t true_us_ = 0;
  std::uint64_t busy_us_ = 0;
};

/// Charges I2C transfer time at 400 kHz to a SimClock so that reads within a
/// tick get distinct, realistic timestamps.
class TimedBus final : public bus::I2cBus {
 public:
  TimedBus(bus::I2cBus& inner, SimClock& clock) : inner_(inner), clock_(clock) {}

  void mux_select(std::uint8_t control_byte) override;
  void read_burst(std::uint8_t device_addr, std::uint8_t start_reg,
                  std::span<std::uint8_t> out) override;
  void write_register(std::uint8_t device_addr, std::uint8_t reg, std::uint8_t value) override;
  void sync(std::uint64_t t_local_us) override { inner_.sync(t_local_us); }

  /// Microseconds to clock `bytes` bytes (9 bit times each) at 400 kHz.
  static std::uint64_t transfer_us(std::size_t bytes) { return (bytes * 9 * 10 + 3) / 4; }

 private:
  bus::I2cBus& inner_;
  SimClock& clock_;
};

}  // namespace vibedaq::sim
