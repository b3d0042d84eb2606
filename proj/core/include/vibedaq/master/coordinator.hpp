#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vibedaq/core/types.hpp"
#include "vibedaq/master/dataset.hpp"
#include "vibedaq/master/integrity.hpp"
#include "vibedaq/master/live.hpp"
#include "vibedaq/protocol/clock_offset.hpp"
#include "vibedaq/protocol/messages.hpp"

namespace vibedaq::master {

enum class RunStatus { Pending, Running, Draining, Complete, Aborted };

std::string_view to_string(RunStatus s);

struct RunSession {
  std::uint32_t run_id = 0;
  AcquisitionConfig config;
  RunStatus status = RunStatus::Pending;
  std::vector<std::uint8_t> participants;
  std::map<std::uint8_t, proto::ClockOffset> offsets;
  std::set<std::uint8_t> finished_slaves;
  std::uint64_t created_us = 0;
  /// Scheduled start on the master clock, 0 until START is sent.
  std::uint64_t start_us = 0;
  std::uint64_t end_us = 0;
  std::string error;

  bool active() const {
    return status == RunStatus::Pending || status == RunStatus::Running ||
           status == RunStatus::Draining;
  }
};

struct SlaveInfo {
  std::uint8_t slave_id = 0;
  std::vector<std::uint8_t> mux_channels;
  bool connected = false;
  std::uint64_t connected_since_us = 0;
  std::uint64_t disconnected_at_us = 0;
  std::uint64_t last_heartbeat_us = 0;
  std::uint64_t samples_acquired = 0;
};

/// A message for the driver to deliver to one slave.
struct Outbound {
  std::uint8_t slave_id = 0;
  proto::Message message;
};

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CoordinatorOptions {
  std::size_t timesync_exchanges = 8;
  std::uint64_t ack_timeout_us = 5'000'000;
  std::uint64_t start_delay_us = 2'000'000;
  /// A participant gone longer than this aborts the run.
  std::uint64_t lost_slave_timeout_us = 60'000'000;
  /// Called once when a run reaches COMPLETE or ABORTED.
  std::function<void(const RunSession&, const RunDataset&)> on_run_finished;
  std::function<void(std::string_view)> warn;
};

/// Master-side run control without I/O. The driver reports connections,
/// messages and the passage of time; the coordinator answers with messages
/// to deliver. Not thread-safe: callers serialize access.
class Coordinator {
 public:
  explicit Coordinator(CoordinatorOptions options = {});

  std::vector<Outbound> on_hello(const proto::Hello& hello, std::uint64_t now_us);
  void on_disconnect(std::uint8_t slave_id, std::uint64_t now_us);
  std::vector<Outbound> on_message(std::uint8_t slave_id, const proto::Message& msg,
                                   std::uint64_t now_us);
  /// Checks timeouts. Call at least every few hundred milliseconds.
  std::vector<Outbound> on_timer(std::uint64_t now_us);

  /// Starts a run on every connected slave. Throws RunError when no slave is
  /// connected, a run is already active, or the config is invalid.
  std::uint32_t start_run(AcquisitionConfig cfg, std::uint64_t now_us,
                          std::vector<Outbound>& out);
  /// Requests an early stop. Throws RunError for unknown or finished runs.
  std::vector<Outbound> stop_run(std::uint32_t run_id, std::uint64_t now_us);

  std::optional<std::uint32_t> active_run() const;
  const RunSession* session(std::uint32_t run_id) const;
  const RunDataset* dataset(std::uint32_t run_id) const;
  std::vector<std::uint32_t> run_ids() const;
  std::vector<SlaveInfo> slaves() const;
  std::optional<IntegrityReport> integrity(std::uint32_t run_id) const;

  /// Live frame for the active run, or for the most recent run if none.
  std::optional<LiveFrame> live_frame(std::uint64_t now_us);

  std::uint64_t protocol_warnings() const { return warnings_; }

 private:
  enum class Phase { Timesync, Configuring, Started };

  struct PendingSlave {
    std::vector<proto::TimesyncExchange> exchanges;
    bool config_acked = false;
  };

  struct Run {
    RunSession session;
    RunDataset dataset;
    Phase phase = Phase::Timesync;
    std::uint64_t phase_deadline_us = 0;
    std::map<std::uint8_t, PendingSlave> pending;
  };

  Run* active();
  void warn(const std::string& msg);
  void abort(Run& run, const std::string& reason, std::uint64_t now_us,
             std::vector<Outbound>& out, bool stop_slaves);
  void finish(Run& run, RunStatus status, std::uint64_t now_us);
  void handle_timesync(Run& run, std::uint8_t slave, const proto::TimesyncResp& resp,
                       std::uint64_t now_us, std::vector<Outbound>& out);
  void handle_ack(Run& run, std::uint8_t slave, const proto::Ack& ack, std::uint64_t now_us,
                  std::vector<Outbound>& out);
  void send_config(Run& run, std::uint64_t now_us, std::vector<Outbound>& out);
  void send_start(Run& run, std::uint64_t now_us, std::vector<Outbound>& out);
  bool participant(const Run& run, std::uint8_t slave) const;

  CoordinatorOptions opts_;
  std::map<std::uint8_t, SlaveInfo> slaves_;
  std::map<std::uint32_t, std::unique_ptr<Run>> runs_;
  std::uint32_t next_run_id_ = 1;
  std::uint64_t warnings_ = 0;
  LiveTap live_;
  std::uint32_t live_run_ = 0;
};

}  // namespace vibedaq::master
