#include "vibedaq/slave/state_machine.hpp"

#include <variant>

namespace vibedaq::slave {

std::string_view to_string(SlaveState s) {
  switch (s) {
    case SlaveState::Idle: return "IDLE";
    case SlaveState::Configured: return "CONFIGURED";
    case SlaveState::Armed: return "ARMED";
    case SlaveState::Acquiring: return "ACQUIRING";
    case SlaveState::Draining: return "DRAINING";
  }
  return "UNKNOWN";
}

SlaveActions SlaveStateMachine::handle(const proto::Message& msg) {
  SlaveActions out;
  auto ack = [&](proto::MsgType t, bool ok) {
    out.replies.emplace_back(proto::Ack{t, ok ? proto::kAckOk : proto::kAckError});
  };

  if (const auto* cfg = std::get_if<proto::Config>(&msg)) {
    const bool legal = state_ == SlaveState::Idle || state_ == SlaveState::Configured;
    const bool ok = legal && validate_config(cfg->config).empty();
    if (ok) {
      config_ = cfg->config;
      state_ = SlaveState::Configured;
    }
    ack(proto::MsgType::Config, ok);
  } else if (const auto* start = std::get_if<proto::Start>(&msg)) {
    if (state_ == SlaveState::Configured) {
      state_ = SlaveState::Armed;
      out.arm_at_local_us = start->scheduled_start_us;
      ack(proto::MsgType::Start, true);
    } else {
      ack(proto::MsgType::Start, false);
    }
  } else if (std::holds_alternative<proto::Stop>(msg)) {
    if (state_ == SlaveState::Armed || state_ == SlaveState::Acquiring) {
      state_ = SlaveState::Draining;
      out.begin_drain = true;
    } else {
      ack(proto::MsgType::Stop, false);
    }
  }
  return out;
}

void SlaveStateMachine::on_start_reached() {
  if (state_ == SlaveState::Armed) state_ = SlaveState::Acquiring;
}

void SlaveStateMachine::on_acquisition_finished() {
  if (state_ == SlaveState::Acquiring || state_ == SlaveState::Armed) state_ = SlaveState::Draining;
}

void SlaveStateMachine::on_drained() {
  if (state_ == SlaveState::Draining) state_ = SlaveState::Idle;
}

void SlaveStateMachine::abort() {
  state_ = SlaveState::Idle;
  config_.reset();
}

}  // namespace vibedaq::slave
