#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vibedaq/core/types.hpp"
#include "vibedaq/master/coordinator.hpp"
#include "vibedaq/master/dataset.hpp"
#include "vibedaq/master/integrity.hpp"
#include "vibedaq/sensorbus/scenario.hpp"
#include "vibedaq/slave/acquisition_buffer.hpp"

namespace vibedaq::sim {

/// Link outage starting `start_s` seconds after the scheduled run start.
struct DropWindow {
  double start_s = 0.0;
  double duration_s = 0.0;
  /// Affected slave; all slaves when empty.
  std::optional<std::uint8_t> slave_id;
};

struct FaultPlan {
  /// Probability that a DATA_BATCH or HEARTBEAT frame vanishes in transit.
  double loss_probability = 0.0;
  std::vector<DropWindow> drops;
};

struct SimulationSpec {
  std::size_t slaves = 2;
  std::size_t sensors_per_slave = 3;
  AcquisitionConfig config;
  /// Defaults to the preset matching config.test_type.
  std::optional<bus::ModalScenario> scenario;
  std::uint64_t seed = 1;
  FaultPlan faults;
  double buffer_seconds = 10.0;
  /// Seconds after the scheduled start at which the master sends STOP.
  std::optional<double> stop_after_s;

  // Node and link models.
  std::int64_t max_clock_offset_us = 50'000;
  double max_drift_ppm = 20.0;
  std::uint64_t poll_jitter_us = 200;
  std::uint64_t link_latency_us = 1'500;
  std::uint64_t link_jitter_us = 1'000;
  std::uint64_t pump_interval_us = 20'000;
};

/// Throws std::invalid_argument for out-of-range counts or probabilities.
void validate_spec(const SimulationSpec& spec);

struct SlaveReport {
  std::uint8_t slave_id = 0;
  std::uint64_t ticks = 0;
  std::uint64_t overflow_dropped = 0;
  std::vector<slave::GapRecord> overflow_gaps;
  std::size_t buffer_high_watermark = 0;
  std::uint64_t max_lateness_us = 0;
  double mean_lateness_us = 0.0;
  double mean_intra_tick_skew_us = 0.0;
  std::int64_t true_offset_us = 0;
  std::int64_t estimated_offset_us = 0;
  double drift_ppm = 0.0;
  std::uint64_t reconnects = 0;
};

struct TransportReport {
  std::uint64_t frames_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t data_frames_lost = 0;
  std::uint64_t heartbeats_lost = 0;
  /// Records lost to random frame loss.
  std::uint64_t samples_lost_random = 0;
  /// Records in flight when a link went down.
  std::uint64_t samples_lost_in_flight = 0;
  std::uint64_t decode_errors = 0;

  std::uint64_t samples_lost() const { return samples_lost_random + samples_lost_in_flight; }
};

struct SimulationResult {
  std::uint64_t seed = 0;
  master::RunSession session;
  master::RunDataset dataset;
  master::IntegrityReport integrity;
  std::vector<SlaveReport> slaves;
  TransportReport transport;
  std::uint64_t protocol_warnings = 0;
  /// Simulated seconds from the first connection to the end of the run.
  double simulated_s = 0.0;

  bool ok() const { return session.status == master::RunStatus::Complete; }
  /// Per-sample accounting: expected minus received, summed over sensors.
  std::uint64_t deficit() const;
  /// Samples explained by transport loss and slave overflow.
  std::uint64_t explained_loss() const;
};

/// Fixed virtual epoch (2025-01-01T00:00:00Z) so artifacts do not depend on
/// the wall clock.
inline constexpr std::uint64_t kSimEpochUs = 1'735'689'600'000'000;

/// Runs master and slaves in one thread against virtual time. Frames cross
/// an in-process link as encoded bytes. Same spec, same result.
SimulationResult run_simulation(const SimulationSpec& spec);

}  // namespace vibedaq::sim
