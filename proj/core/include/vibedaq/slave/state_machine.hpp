#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "vibedaq/core/types.hpp"
#include "vibedaq/protocol/messages.hpp"

namespace vibedaq::slave {

// IDLE -> CONFIGURED -> ARMED -> ACQUIRING -> DRAINING -> IDLE.
// CONFIG is legal in IDLE/CONFIGURED, STOP in ARMED/ACQUIRING.
enum class SlaveState { Idle, Configured, Armed, Acquiring, Draining };

std::string_view to_string(SlaveState s);

struct SlaveActions {
  std::vector<proto::Message> replies;
  /// Set when START was accepted: local-clock instant to begin polling.
  std::optional<std::uint64_t> arm_at_local_us;
  /// Set when STOP was accepted: stop polling and flush the buffer.
  bool begin_drain = false;
};

class SlaveStateMachine {
 public:
  SlaveState state() const { return state_; }
  const std::optional<AcquisitionConfig>& config() const { return config_; }

  /// Handles CONFIG, START and STOP. Illegal messages get ACK(error) and
  /// leave the state unchanged. Other message types are ignored here.
  SlaveActions handle(const proto::Message& msg);

  // Internal events from the acquisition and streaming activities.
  void on_start_reached();
  void on_acquisition_finished();
  void on_drained();
  /// Drops the current run and returns to IDLE (e.g. master lost).
  void abort();

 private:
  SlaveState state_ = SlaveState::Idle;
  std::optional<AcquisitionConfig> config_;
};

}  // namespace vibedaq::slave
