#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "vibedaq/core/clock.hpp"
#include "vibedaq/protocol/messages.hpp"
#include "vibedaq/sensorbus/bus.hpp"
#include "vibedaq/slave/acquisition.hpp"
#include "vibedaq/slave/acquisition_buffer.hpp"
#include "vibedaq/slave/state_machine.hpp"

namespace vibedaq::slave {

struct SlaveOptions {
  std::uint8_t slave_id = 1;
  std::vector<std::uint8_t> mux_channels{0, 1, 2};
  /// Buffer capacity per sensor, in seconds of samples at the run's rate.
  double buffer_seconds = 10.0;
  std::size_t max_batch_records = 64;
  std::uint64_t heartbeat_interval_us = 1'000'000;
};

/// One slave acquisition node without any I/O of its own. Three activities
/// drive it and may run on different threads:
///   - control: on_message() for frames from the master;
///   - acquisition: next_deadline()/poll() on the polling clock;
///   - streaming: next_outbound()/sent()/send_failed() from the sender.
/// Acquisition and streaming share only the AcquisitionBuffer, so the
/// polling loop never waits on the network.
class SlaveNode {
 public:
  SlaveNode(SlaveOptions options, bus::I2cBus& bus);

  proto::Hello hello() const;
  std::uint8_t id() const { return opts_.slave_id; }

  /// Handles one message from the master; `clock` supplies receive/transmit
  /// timestamps for TIMESYNC.
  std::vector<proto::Message> on_message(const proto::Message& msg, Clock& clock);

  /// Local-clock time of the next polling tick, if a run is armed or active.
  std::optional<std::uint64_t> next_deadline() const;
  /// Executes the next tick if it is due at clock.now_us().
  void poll(Clock& clock);

  /// Next frame to transmit, if any. A DATA_BATCH stays in flight until
  /// sent() or send_failed() is called.
  std::optional<proto::Message> next_outbound(std::uint64_t now_local_us);
  void sent();
  void send_failed();

  /// Abandons the current run (master lost for good).
  void abort_run();

  SlaveState state() const;
  std::optional<AcquisitionSummary> last_summary() const;
  std::vector<GapRecord> overflow_gaps() const;
  std::uint64_t overflow_dropped() const;
  std::size_t buffer_occupancy() const;
  std::size_t buffer_high_watermark() const;

 private:
  void finish_acquisition_locked();

  SlaveOptions opts_;
  bus::I2cBus& bus_;

  mutable std::mutex control_mu_;
  SlaveStateMachine sm_;
  std::unique_ptr<AcquisitionLoop> loop_;
  std::shared_ptr<AcquisitionBuffer> buffer_;
  std::optional<AcquisitionSummary> summary_;
  std::vector<GapRecord> finished_gaps_;
  std::uint64_t finished_dropped_ = 0;

  // Streaming-side state (owned by the sender).
  std::mutex stream_mu_;
  std::optional<PendingBatch> in_flight_;
  std::optional<proto::RunEnd> run_end_;
  bool run_end_in_flight_ = false;
  std::uint64_t next_heartbeat_us_ = 0;
  std::atomic<std::uint64_t> samples_acquired_{0};
};

}  // namespace vibedaq::slave
