#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vibedaq/core/clock.hpp"
#include "vibedaq/core/types.hpp"
#include "vibedaq/sensorbus/bus.hpp"

namespace vibedaq::slave {

using SampleSink = std::function<void(std::uint8_t mux, const SampleRecord&)>;

struct SensorStats {
  std::uint8_t mux_channel = 0;
  std::uint64_t samples = 0;
  bool failed = false;
  std::string failure;
  std::uint64_t first_t_us = 0;
  std::uint64_t last_t_us = 0;

  /// Mean spacing of this sensor's timestamps, 0 with fewer than two samples.
  double mean_interval_us() const;
};

struct AcquisitionSummary {
  std::uint64_t ticks = 0;
  std::uint64_t planned_ticks = 0;
  bool stopped_early = false;
  std::vector<SensorStats> sensors;
  /// Worst delay between a tick's deadline and its first bus transaction.
  std::uint64_t max_lateness_us = 0;
  double mean_lateness_us = 0.0;
  /// Mean time between the first and last sensor read within a tick.
  double mean_intra_tick_skew_us = 0.0;
};

/// Direct-polling loop on an absolute deadline grid: tick k is due at
/// start + ceil(k / odr). Each tick selects every sensor's mux channel in
/// ascending order and burst-reads its six output registers.
class AcquisitionLoop {
 public:
  AcquisitionLoop(bus::I2cBus& bus, std::vector<std::uint8_t> mux_channels, AcquisitionConfig cfg,
                  std::uint64_t start_local_us);

  /// Programs rate/range into every sensor and checks WHO_AM_I. Sensors that
  /// fail are marked failed and skipped. Returns the number of live sensors.
  std::size_t configure_sensors();

  std::uint64_t deadline(std::uint64_t k) const;
  std::optional<std::uint64_t> next_deadline() const;
  bool done() const;

  /// Runs the next tick. Sample timestamps are read from `clock` just before
  /// each sensor's burst.
  void poll_tick(Clock& clock, const SampleSink& sink);

  void request_stop() { stop_.store(true); }
  AcquisitionSummary summary() const;

  std::uint64_t ticks_done() const { return k_; }
  const AcquisitionConfig& config() const { return cfg_; }

 private:
  bus::I2cBus& bus_;
  AcquisitionConfig cfg_;
  std::uint32_t odr_mhz_;
  std::uint64_t start_us_;
  std::uint64_t total_ticks_;
  std::uint64_t k_ = 0;
  std::atomic<bool> stop_{false};
  std::vector<SensorStats> sensors_;
  std::uint64_t max_lateness_us_ = 0;
  double lateness_sum_us_ = 0.0;
  double skew_sum_us_ = 0.0;
};

/// Blocking form of the loop: sleeps to each deadline on `clock` until the
/// planned duration elapses or `stop` becomes true.
AcquisitionSummary run_acquisition(const AcquisitionConfig& cfg, bus::I2cBus& bus,
                                   const std::vector<std::uint8_t>& mux_channels, Clock& clock,
                                   const SampleSink& sink, const std::atomic<bool>& stop,
                                   std::uint64_t start_local_us);

}  // namespace vibedaq::slave
