#include "vibedaq/slave/slave_node.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

namespace vibedaq::slave {

SlaveNode::SlaveNode(SlaveOptions options, bus::I2cBus& bus)
    : opts_(std::move(options)), bus_(bus) {
  std::sort(opts_.mux_channels.begin(), opts_.mux_channels.end());
}

proto::Hello SlaveNode::hello() const { return {opts_.slave_id, opts_.mux_channels}; }

std::vector<proto::Message> SlaveNode::on_message(const proto::Message& msg, Clock& clock) {
  if (const auto* req = std::get_if<proto::TimesyncReq>(&msg)) {
    proto::TimesyncResp resp{req->t1_us, clock.now_us(), 0};
    resp.t3_us = clock.now_us();
    return {resp};
  }
  if (!std::holds_alternative<proto::Config>(msg) && !std::holds_alternative<proto::Start>(msg) &&
      !std::holds_alternative<proto::Stop>(msg)) {
    return {};
  }

  std::unique_lock lock(control_mu_);
  auto actions = sm_.handle(msg);
  std::optional<std::uint64_t> armed_start;

  if (actions.arm_at_local_us) {
    const auto& cfg = *sm_.config();
    const auto capacity = static_cast<std::size_t>(
        std::max(1.0, std::ceil(opts_.buffer_seconds * cfg.odr_hz)));
    buffer_ = std::make_shared<AcquisitionBuffer>(opts_.mux_channels, capacity);
    const std::uint64_t start = std::max(*actions.arm_at_local_us, clock.now_us());
    loop_ = std::make_unique<AcquisitionLoop>(bus_, opts_.mux_channels, cfg, start);
    loop_->configure_sensors();
    summary_.reset();
    samples_acquired_ = 0;
    armed_start = start;
  }
  if (actions.begin_drain && loop_) {
    loop_->request_stop();
    finish_acquisition_locked();
  }
  lock.unlock();

  if (armed_start) {
    // Lock order is stream -> control; never take stream_mu_ under control_mu_.
    std::lock_guard slock(stream_mu_);
    in_flight_.reset();
    run_end_.reset();
    run_end_in_flight_ = false;
    next_heartbeat_us_ = *armed_start;
  }
  return std::move(actions.replies);
}

void SlaveNode::finish_acquisition_locked() {
  summary_ = loop_->summary();
  loop_.reset();
  sm_.on_acquisition_finished();
}

std::optional<std::uint64_t> SlaveNode::next_deadline() const {
  std::lock_guard lock(control_mu_);
  if (!loop_) return std::nullopt;
  return loop_->next_deadline();
}

void SlaveNode::poll(Clock& clock) {
  std::lock_guard lock(control_mu_);
  if (!loop_) return;
  const auto due = loop_->next_deadline();
  const std::uint64_t now = clock.now_us();
  if (!due || *due > now) return;
  if (sm_.state() == SlaveState::Armed) sm_.on_start_reached();

  auto buffer = buffer_;
  loop_->poll_tick(clock, [&](std::uint8_t mux, const SampleRecord& rec) {
    buffer->push(mux, rec);
    samples_acquired_.fetch_add(1, std::memory_order_relaxed);
  });
  if (loop_->done()) finish_acquisition_locked();
}

std::optional<proto::Message> SlaveNode::next_outbound(std::uint64_t now_local_us) {
  std::shared_ptr<AcquisitionBuffer> buffer;
  SlaveState state;
  std::uint64_t ticks = 0;
  {
    std::lock_guard lock(control_mu_);
    buffer = buffer_;
    state = sm_.state();
    if (summary_) ticks = summary_->ticks;
  }
  if (!buffer) return std::nullopt;

  std::lock_guard slock(stream_mu_);
  if (in_flight_ || run_end_in_flight_) return std::nullopt;
  if (run_end_) {
    run_end_in_flight_ = true;
    return *run_end_;
  }

  const bool running = state == SlaveState::Acquiring || state == SlaveState::Draining;
  if (running && now_local_us >= next_heartbeat_us_) {
    next_heartbeat_us_ = now_local_us + opts_.heartbeat_interval_us;
    return proto::Heartbeat{opts_.slave_id, samples_acquired_.load()};
  }

  if (auto batch = buffer->take_batch(opts_.max_batch_records)) {
    proto::DataBatch msg;
    msg.slave_id = opts_.slave_id;
    msg.mux_channel = batch->mux_channel;
    msg.seq_first = batch->records.front().seq;
    msg.records.reserve(batch->records.size());
    for (const auto& r : batch->records) {
      msg.records.push_back({r.t_local_us, r.raw[0], r.raw[1], r.raw[2]});
    }
    in_flight_ = std::move(*batch);
    return msg;
  }

  if (state == SlaveState::Draining) {
    std::lock_guard lock(control_mu_);
    if (sm_.state() == SlaveState::Draining) {
      sm_.on_drained();
      run_end_ = proto::RunEnd{opts_.slave_id, ticks};
      run_end_in_flight_ = true;
      return *run_end_;
    }
  }
  return std::nullopt;
}

void SlaveNode::sent() {
  std::lock_guard slock(stream_mu_);
  in_flight_.reset();
  if (run_end_in_flight_) {
    run_end_.reset();
    run_end_in_flight_ = false;
  }
}

void SlaveNode::send_failed() {
  std::shared_ptr<AcquisitionBuffer> buffer;
  {
    std::lock_guard lock(control_mu_);
    buffer = buffer_;
  }
  std::lock_guard slock(stream_mu_);
  if (in_flight_ && buffer) buffer->restore(std::move(*in_flight_));
  in_flight_.reset();
  run_end_in_flight_ = false;
}

void SlaveNode::abort_run() {
  std::lock_guard lock(control_mu_);
  if (loop_) {
    loop_->request_stop();
    summary_ = loop_->summary();
    loop_.reset();
  }
  sm_.abort();
}

SlaveState SlaveNode::state() const {
  std::lock_guard lock(control_mu_);
  return sm_.state();
}

std::optional<AcquisitionSummary> SlaveNode::last_summary() const {
  std::lock_guard lock(control_mu_);
  return summary_;
}

std::vector<GapRecord> SlaveNode::overflow_gaps() const {
  std::lock_guard lock(control_mu_);
  return buffer_ ? buffer_->gaps() : std::vector<GapRecord>{};
}

std::uint64_t SlaveNode::overflow_dropped() const {
  std::lock_guard lock(control_mu_);
  return buffer_ ? buffer_->dropped() : 0;
}

std::size_t SlaveNode::buffer_occupancy() const {
  std::lock_guard lock(control_mu_);
  return buffer_ ? buffer_->occupancy() : 0;
}

std::size_t SlaveNode::buffer_high_watermark() const {
  std::lock_guard lock(control_mu_);
  return buffer_ ? buffer_->high_watermark() : 0;
}

}  // namespace vibedaq::slave
