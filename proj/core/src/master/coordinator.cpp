#include "vibedaq/master/coordinator.hpp"

#include <algorithm>
#include <variant>

namespace vibedaq::master {

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Pending: return "PENDING";
    case RunStatus::Running: return "RUNNING";
    case RunStatus::Draining: return "DRAINING";
    case RunStatus::Complete: return "COMPLETE";
    case RunStatus::Aborted: return "ABORTED";
  }
  return "UNKNOWN";
}

Coordinator::Coordinator(CoordinatorOptions options) : opts_(std::move(options)) {}

void Coordinator::warn(const std::string& msg) {
  ++warnings_;
  if (opts_.warn) opts_.warn(msg);
}

Coordinator::Run* Coordinator::active() {
  for (auto& [id, run] : runs_) {
    if (run->session.active()) return run.get();
  }
  return nullptr;
}

bool Coordinator::participant(const Run& run, std::uint8_t slave) const {
  const auto& p = run.session.participants;
  return std::find(p.begin(), p.end(), slave) != p.end();
}

std::vector<Outbound> Coordinator::on_hello(const proto::Hello& hello, std::uint64_t now_us) {
  auto& info = slaves_[hello.slave_id];
  info.slave_id = hello.slave_id;
  info.mux_channels = hello.mux_channels;
  info.connected = true;
  info.connected_since_us = now_us;
  info.disconnected_at_us = 0;
  return {{hello.slave_id, proto::Ack{proto::MsgType::Hello, proto::kAckOk}}};
}

void Coordinator::on_disconnect(std::uint8_t slave_id, std::uint64_t now_us) {
  auto it = slaves_.find(slave_id);
  if (it == slaves_.end()) return;
  it->second.connected = false;
  it->second.disconnected_at_us = now_us;

  Run* run = active();
  if (run && run->session.status == RunStatus::Pending && participant(*run, slave_id)) {
    std::vector<Outbound> ignored;
    abort(*run, "slave " + std::to_string(slave_id) + " disconnected during start", now_us,
          ignored, false);
  }
}

std::uint32_t Coordinator::start_run(AcquisitionConfig cfg, std::uint64_t now_us,
                                     std::vector<Outbound>& out) {
  if (active()) throw RunError("a run is already active");
  if (auto errs = validate_config(cfg); !errs.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += " " + e + ";";
    msg.pop_back();
    throw RunError(msg);
  }
  std::vector<std::uint8_t> ids;
  std::vector<SensorId> sensors;
  for (const auto& [id, info] : slaves_) {
    if (!info.connected) continue;
    ids.push_back(id);
    for (auto m : info.mux_channels) sensors.push_back({id, m});
  }
  if (ids.empty()) throw RunError("no slaves");

  cfg.run_id = next_run_id_++;
  cfg.scheduled_start_us = 0;
  auto run = std::make_unique<Run>();
  run->session.run_id = cfg.run_id;
  run->session.config = cfg;
  run->session.participants = ids;
  run->session.created_us = now_us;
  run->dataset = RunDataset(cfg, sensors);
  run->phase = Phase::Timesync;
  run->phase_deadline_us = now_us + opts_.ack_timeout_us;
  for (auto id : ids) {
    run->pending[id];
    out.push_back({id, proto::TimesyncReq{now_us}});
  }
  const auto run_id = cfg.run_id;
  runs_[run_id] = std::move(run);
  live_.reset();
  live_run_ = run_id;
  return run_id;
}

std::vector<Outbound> Coordinator::stop_run(std::uint32_t run_id, std::uint64_t now_us) {
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw RunError("unknown run " + std::to_string(run_id));
  Run& run = *it->second;
  std::vector<Outbound> out;
  switch (run.session.status) {
    case RunStatus::Pending:
      abort(run, "stopped before start", now_us, out, false);
      break;
    case RunStatus::Running:
      run.session.status = RunStatus::Draining;
      for (auto id : run.session.participants) out.push_back({id, proto::Stop{}});
      break;
    case RunStatus::Draining:
      break;
    default:
      throw RunError("run " + std::to_string(run_id) + " is not active");
  }
  return out;
}

std::vector<Outbound> Coordinator::on_message(std::uint8_t slave_id, const proto::Message& msg,
                                              std::uint64_t now_us) {
  std::vector<Outbound> out;
  if (const auto* hello = std::get_if<proto::Hello>(&msg)) return on_hello(*hello, now_us);

  if (const auto* hb = std::get_if<proto::Heartbeat>(&msg)) {
    auto& info = slaves_[slave_id];
    info.last_heartbeat_us = now_us;
    info.samples_acquired = hb->samples_acquired;
    return out;
  }

  Run* run = active();
  if (const auto* batch = std::get_if<proto::DataBatch>(&msg)) {
    if (!run || run->phase != Phase::Started || !participant(*run, batch->slave_id)) {
      warn("discarding batch from slave " + std::to_string(batch->slave_id) + ": no matching run");
      return out;
    }
    try {
      auto r = run->dataset.ingest(*batch, run->session.offsets.at(batch->slave_id));
      if (r.duplicates) warn("ignored " + std::to_string(r.duplicates) + " duplicate samples");
    } catch (const std::invalid_argument& e) {
      warn(std::string("discarding batch: ") + e.what());
    }
    return out;
  }

  if (!run || !participant(*run, slave_id)) {
    if (!std::holds_alternative<proto::Ack>(msg)) {
      warn("unexpected " + std::string(proto::to_string(proto::type_of(msg))) + " from slave " +
           std::to_string(slave_id));
    }
    return out;
  }

  if (const auto* resp = std::get_if<proto::TimesyncResp>(&msg)) {
    handle_timesync(*run, slave_id, *resp, now_us, out);
  } else if (const auto* ack = std::get_if<proto::Ack>(&msg)) {
    handle_ack(*run, slave_id, *ack, now_us, out);
  } else if (const auto* end = std::get_if<proto::RunEnd>(&msg)) {
    if (run->phase != Phase::Started) return out;
    run->dataset.set_expected(slave_id, end->total_samples);
    run->session.finished_slaves.insert(slave_id);
    if (run->session.finished_slaves.size() == run->session.participants.size()) {
      finish(*run, RunStatus::Complete, now_us);
    }
  }
  return out;
}

void Coordinator::handle_timesync(Run& run, std::uint8_t slave, const proto::TimesyncResp& resp,
                                  std::uint64_t now_us, std::vector<Outbound>& out) {
  if (run.phase != Phase::Timesync) return;
  auto& p = run.pending[slave];
  if (p.exchanges.size() >= opts_.timesync_exchanges) return;
  p.exchanges.push_back({static_cast<std::int64_t>(resp.t1_us), static_cast<std::int64_t>(resp.t2_us),
                         static_cast<std::int64_t>(resp.t3_us), static_cast<std::int64_t>(now_us)});
  if (p.exchanges.size() < opts_.timesync_exchanges) {
    out.push_back({slave, proto::TimesyncReq{now_us}});
    return;
  }
  run.session.offsets[slave] = proto::estimate_offset(p.exchanges);
  const bool all = std::all_of(run.pending.begin(), run.pending.end(), [&](const auto& kv) {
    return kv.second.exchanges.size() >= opts_.timesync_exchanges;
  });
  if (all) send_config(run, now_us, out);
}

void Coordinator::send_config(Run& run, std::uint64_t now_us, std::vector<Outbound>& out) {
  run.phase = Phase::Configuring;
  run.phase_deadline_us = now_us + opts_.ack_timeout_us;
  for (auto id : run.session.participants) out.push_back({id, proto::Config{run.session.config}});
}

void Coordinator::handle_ack(Run& run, std::uint8_t slave, const proto::Ack& ack,
                             std::uint64_t now_us, std::vector<Outbound>& out) {
  if (ack.acked == proto::MsgType::Config && run.phase == Phase::Configuring) {
    if (ack.status != proto::kAckOk) {
      abort(run, "slave " + std::to_string(slave) + " rejected config", now_us, out, false);
      return;
    }
    run.pending[slave].config_acked = true;
    const bool all = std::all_of(run.pending.begin(), run.pending.end(),
                                 [](const auto& kv) { return kv.second.config_acked; });
    if (all) send_start(run, now_us, out);
  } else if (ack.acked == proto::MsgType::Start && ack.status != proto::kAckOk) {
    abort(run, "slave " + std::to_string(slave) + " rejected start", now_us, out, true);
  } else if (ack.acked == proto::MsgType::Stop && ack.status != proto::kAckOk) {
    warn("slave " + std::to_string(slave) + " rejected stop");
  }
}

void Coordinator::send_start(Run& run, std::uint64_t now_us, std::vector<Outbound>& out) {
  const std::uint64_t start = now_us + opts_.start_delay_us;
  run.phase = Phase::Started;
  run.session.status = RunStatus::Running;
  run.session.start_us = start;
  run.session.config.scheduled_start_us = start;
  for (auto id : run.session.participants) {
    const auto local = run.session.offsets.at(id).to_local(static_cast<std::int64_t>(start));
    out.push_back({id, proto::Start{static_cast<std::uint64_t>(std::max<std::int64_t>(local, 0))}});
  }
}

std::vector<Outbound> Coordinator::on_timer(std::uint64_t now_us) {
  std::vector<Outbound> out;
  Run* run = active();
  if (!run) return out;

  if (run->phase != Phase::Started) {
    if (now_us >= run->phase_deadline_us) {
      std::string who;
      for (const auto& [id, p] : run->pending) {
        const bool waiting = run->phase == Phase::Timesync
                                 ? p.exchanges.size() < opts_.timesync_exchanges
                                 : !p.config_acked;
        if (waiting) who += (who.empty() ? "" : ",") + std::to_string(id);
      }
      abort(*run, "ack timeout from slave " + who, now_us, out, false);
    }
    return out;
  }

  for (auto id : run->session.participants) {
    if (run->session.finished_slaves.count(id)) continue;
    const auto& info = slaves_[id];
    if (!info.connected && now_us - info.disconnected_at_us >= opts_.lost_slave_timeout_us) {
      abort(*run, "lost slave " + std::to_string(id), now_us, out, true);
      break;
    }
  }
  return out;
}

void Coordinator::abort(Run& run, const std::string& reason, std::uint64_t now_us,
                        std::vector<Outbound>& out, bool stop_slaves) {
  if (stop_slaves) {
    for (auto id : run.session.participants) {
      if (slaves_[id].connected && !run.session.finished_slaves.count(id)) {
        out.push_back({id, proto::Stop{}});
      }
    }
  }
  run.session.error = reason;
  warn("run " + std::to_string(run.session.run_id) + " aborted: " + reason);
  finish(run, RunStatus::Aborted, now_us);
}

void Coordinator::finish(Run& run, RunStatus status, std::uint64_t now_us) {
  run.session.status = status;
  run.session.end_us = now_us;
  if (opts_.on_run_finished) opts_.on_run_finished(run.session, run.dataset);
}

std::optional<std::uint32_t> Coordinator::active_run() const {
  for (const auto& [id, run] : runs_) {
    if (run->session.active()) return id;
  }
  return std::nullopt;
}

const RunSession* Coordinator::session(std::uint32_t run_id) const {
  auto it = runs_.find(run_id);
  return it == runs_.end() ? nullptr : &it->second->session;
}

const RunDataset* Coordinator::dataset(std::uint32_t run_id) const {
  auto it = runs_.find(run_id);
  return it == runs_.end() ? nullptr : &it->second->dataset;
}

std::vector<std::uint32_t> Coordinator::run_ids() const {
  std::vector<std::uint32_t> ids;
  for (const auto& [id, run] : runs_) ids.push_back(id);
  return ids;
}

std::vector<SlaveInfo> Coordinator::slaves() const {
  std::vector<SlaveInfo> out;
  for (const auto& [id, info] : slaves_) out.push_back(info);
  return out;
}

std::optional<IntegrityReport> Coordinator::integrity(std::uint32_t run_id) const {
  const auto* ds = dataset(run_id);
  if (!ds) return std::nullopt;
  return integrity_report(*ds);
}

std::optional<LiveFrame> Coordinator::live_frame(std::uint64_t now_us) {
  const auto* ds = dataset(live_run_);
  if (!ds) return std::nullopt;
  return live_.next(*ds, now_us);
}

}  // namespace vibedaq::master
