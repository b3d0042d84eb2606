#include "vibedaq/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <random>
#include <stdexcept>
#include <variant>

#include "vibedaq/protocol/frame.hpp"
#include "vibedaq/sensorbus/bus.hpp"
#include "vibedaq/sim/sim_clock.hpp"
#include "vibedaq/slave/slave_node.hpp"

namespace vibedaq::sim {

void validate_spec(const SimulationSpec& spec) {
  if (spec.slaves < 1 || spec.slaves > 255) throw std::invalid_argument("slave count must be in [1, 255]");
  if (spec.sensors_per_slave < 1 || spec.sensors_per_slave > bus::kMuxChannels) {
    throw std::invalid_argument("sensors per slave must be in [1, 8]");
  }
  if (!(spec.faults.loss_probability >= 0.0 && spec.faults.loss_probability < 1.0)) {
    throw std::invalid_argument("loss probability must be in [0, 1)");
  }
  for (const auto& d : spec.faults.drops) {
    if (!(d.start_s >= 0.0) || !(d.duration_s > 0.0)) {
      throw std::invalid_argument("drop windows need start >= 0 and duration > 0");
    }
  }
  if (!(spec.buffer_seconds > 0.0)) throw std::invalid_argument("buffer seconds must be positive");
  if (auto errs = validate_config(spec.config); !errs.empty()) throw std::invalid_argument(errs.front());
}

std::uint64_t SimulationResult::deficit() const {
  std::uint64_t d = 0;
  for (const auto& [id, series] : dataset.sensors()) d += dataset.expected(id) - series.received();
  return d;
}

std::uint64_t SimulationResult::explained_loss() const {
  std::uint64_t n = transport.samples_lost();
  for (const auto& s : slaves) n += s.overflow_dropped;
  return n;
}

namespace {

constexpr std::uint64_t kReconnectMinUs = 500'000;
constexpr std::uint64_t kReconnectMaxUs = 8'000'000;
constexpr std::uint64_t kMasterTickUs = 100'000;

enum class EventKind { Poll, Pump, Deliver, MasterTick, Reconnect, LinkDown, LinkUp, StartRun, StopRun };

struct Event {
  std::uint64_t t = 0;
  std::uint64_t order = 0;
  EventKind kind = EventKind::MasterTick;
  std::size_t slave = 0;
  bool to_master = false;
  std::uint64_t epoch = 0;
  std::vector<std::uint8_t> bytes;
  std::uint64_t data_records = 0;

  static Event at(std::uint64_t t, EventKind kind, std::size_t slave = 0) {
    Event e;
    e.t = t;
    e.kind = kind;
    e.slave = slave;
    return e;
  }

  bool operator>(const Event& o) const { return t != o.t ? t > o.t : order > o.order; }
};

struct SimSlave {
  std::size_t index = 0;
  std::uint8_t id = 0;
  std::vector<std::uint8_t> mux;
  std::unique_ptr<bus::VirtualBus> vbus;
  std::unique_ptr<SimClock> clock;
  std::unique_ptr<TimedBus> tbus;
  std::unique_ptr<slave::SlaveNode> node;
  proto::FrameDecoder rx;
  proto::FrameDecoder master_rx;  // master's decoder for this connection

  bool connected = false;
  std::uint64_t link_epoch = 0;  // bumps on every disconnect
  int link_down_depth = 0;
  std::uint64_t backoff_us = kReconnectMinUs;
  std::uint64_t last_to_master_t = 0;
  std::uint64_t last_to_slave_t = 0;
  std::uint64_t reconnects = 0;
  bool poll_scheduled = false;
  std::mt19937_64 jitter_rng;
};

class World {
 public:
  explicit World(const SimulationSpec& spec) : spec_(spec) {}

  SimulationResult run();

 private:
  void push(Event e) {
    e.order = order_++;
    queue_.push(std::move(e));
  }
  void schedule_poll(SimSlave& s);
  void pump(SimSlave& s);
  void send_to_master(SimSlave& s, const proto::Message& msg);
  void send_to_slave(SimSlave& s, const proto::Message& msg);
  void deliver(Event& e);
  void dispatch(const std::vector<master::Outbound>& out);
  void link_down(SimSlave& s);
  void try_reconnect(SimSlave& s);
  std::uint64_t latency() {
    return spec_.link_latency_us +
           (spec_.link_jitter_us ? std::uniform_int_distribution<std::uint64_t>(0, spec_.link_jitter_us)(link_rng_) : 0);
  }

  const SimulationSpec& spec_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t order_ = 0;
  std::uint64_t now_ = kSimEpochUs;
  std::vector<std::unique_ptr<SimSlave>> slaves_;
  std::unique_ptr<master::Coordinator> coord_;
  std::mt19937_64 link_rng_;
  std::bernoulli_distribution loss_;
  TransportReport transport_;
  std::optional<std::uint32_t> run_id_;
  bool finished_ = false;
  bool drops_scheduled_ = false;
};

void World::schedule_poll(SimSlave& s) {
  auto due = s.node->next_deadline();
  if (!due) {
    s.poll_scheduled = false;
    return;
  }
  std::uint64_t t = s.clock->model().true_time(*due);
  if (spec_.poll_jitter_us) {
    t += std::uniform_int_distribution<std::uint64_t>(0, spec_.poll_jitter_us)(s.jitter_rng);
  }
  Event e;
  e.t = std::max(t, now_);
  e.kind = EventKind::Poll;
  e.slave = s.index;
  push(std::move(e));
  s.poll_scheduled = true;
}

void World::send_to_master(SimSlave& s, const proto::Message& msg) {
  const auto type = proto::type_of(msg);
  Event e;
  e.kind = EventKind::Deliver;
  e.slave = s.index;
  e.to_master = true;
  e.epoch = s.link_epoch;
  e.bytes = proto::encode_frame(msg);
  if (const auto* b = std::get_if<proto::DataBatch>(&msg)) e.data_records = b->records.size();
  ++transport_.frames_sent;
  transport_.bytes_sent += e.bytes.size();

  const bool lossy = type == proto::MsgType::DataBatch || type == proto::MsgType::Heartbeat;
  if (lossy && spec_.faults.loss_probability > 0.0 && loss_(link_rng_)) {
    if (type == proto::MsgType::DataBatch) {
      ++transport_.data_frames_lost;
      transport_.samples_lost_random += e.data_records;
    } else {
      ++transport_.heartbeats_lost;
    }
    return;
  }
  e.t = std::max(now_ + latency(), s.last_to_master_t);
  s.last_to_master_t = e.t;
  push(std::move(e));
}

void World::send_to_slave(SimSlave& s, const proto::Message& msg) {
  if (!s.connected) return;  // write on a dead socket
  Event e;
  e.kind = EventKind::Deliver;
  e.slave = s.index;
  e.to_master = false;
  e.epoch = s.link_epoch;
  e.bytes = proto::encode_frame(msg);
  ++transport_.frames_sent;
  transport_.bytes_sent += e.bytes.size();
  e.t = std::max(now_ + latency(), s.last_to_slave_t);
  s.last_to_slave_t = e.t;
  push(std::move(e));
}

void World::pump(SimSlave& s) {
  if (!s.connected) return;
  s.clock->set_true(now_);
  while (auto msg = s.node->next_outbound(s.clock->now_us())) {
    send_to_master(s, *msg);
    s.node->sent();
  }
}

void World::dispatch(const std::vector<master::Outbound>& out) {
  for (const auto& o : out) {
    for (auto& s : slaves_) {
      if (s->id == o.slave_id) send_to_slave(*s, o.message);
    }
  }
}

void World::deliver(Event& e) {
  auto& s = *slaves_[e.slave];
  if (e.epoch != s.link_epoch) {
    // The connection this frame travelled on has been torn down.
    if (e.to_master) transport_.samples_lost_in_flight += e.data_records;
    return;
  }
  if (e.to_master) {
    s.master_rx.feed(e.bytes);
    while (auto msg = s.master_rx.next()) dispatch(coord_->on_message(s.id, *msg, now_));
    transport_.decode_errors = 0;
    for (const auto& x : slaves_) transport_.decode_errors += x->master_rx.total_errors() + x->rx.total_errors();
  } else {
    s.rx.feed(e.bytes);
    while (auto msg = s.rx.next()) {
      s.clock->set_true(now_);
      for (const auto& reply : s.node->on_message(*msg, *s.clock)) send_to_master(s, reply);
      if (!s.poll_scheduled) schedule_poll(s);
    }
  }
}

void World::link_down(SimSlave& s) {
  if (s.link_down_depth++ > 0 || !s.connected) return;
  s.connected = false;
  ++s.link_epoch;
  s.master_rx = proto::FrameDecoder{};
  s.rx = proto::FrameDecoder{};
  coord_->on_disconnect(s.id, now_);
  s.backoff_us = kReconnectMinUs;
  Event e;
  e.t = now_ + s.backoff_us;
  e.kind = EventKind::Reconnect;
  e.slave = s.index;
  push(std::move(e));
}

void World::try_reconnect(SimSlave& s) {
  if (s.connected) return;
  if (s.link_down_depth > 0) {
    s.backoff_us = std::min(s.backoff_us * 2, kReconnectMaxUs);
    Event e;
    e.t = now_ + s.backoff_us;
    e.kind = EventKind::Reconnect;
    e.slave = s.index;
    push(std::move(e));
    return;
  }
  s.connected = true;
  ++s.reconnects;
  s.last_to_master_t = now_;
  s.last_to_slave_t = now_;
  send_to_master(s, s.node->hello());
}

SimulationResult World::run() {
  validate_spec(spec_);
  std::mt19937_64 root(spec_.seed);
  const auto scenario = spec_.scenario ? *spec_.scenario : bus::preset_for(spec_.config.test_type);
  bus::validate_scenario(scenario, spec_.config.odr_hz);

  link_rng_.seed(root());
  loss_ = std::bernoulli_distribution(spec_.faults.loss_probability);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (std::size_t i = 0; i < spec_.slaves; ++i) {
    auto s = std::make_unique<SimSlave>();
    s->index = i;
    s->id = static_cast<std::uint8_t>(i + 1);
    for (std::size_t m = 0; m < spec_.sensors_per_slave; ++m) s->mux.push_back(static_cast<std::uint8_t>(m));
    OscillatorModel osc;
    osc.epoch_us = kSimEpochUs;
    osc.offset_us = static_cast<std::int64_t>(std::llround(unit(root) * static_cast<double>(spec_.max_clock_offset_us)));
    osc.drift_ppm = unit(root) * spec_.max_drift_ppm;
    s->vbus = std::make_unique<bus::VirtualBus>(scenario, s->mux, root());
    s->jitter_rng.seed(root());
    s->clock = std::make_unique<SimClock>(osc);
    s->tbus = std::make_unique<TimedBus>(*s->vbus, *s->clock);
    slave::SlaveOptions opts;
    opts.slave_id = s->id;
    opts.mux_channels = s->mux;
    opts.buffer_seconds = spec_.buffer_seconds;
    s->node = std::make_unique<slave::SlaveNode>(opts, *s->tbus);
    slaves_.push_back(std::move(s));
  }

  master::CoordinatorOptions copts;
  copts.on_run_finished = [this](const master::RunSession&, const master::RunDataset&) { finished_ = true; };
  coord_ = std::make_unique<master::Coordinator>(std::move(copts));

  // Slaves connect 10 ms apart, the operator starts the run 100 ms later.
  for (std::size_t i = 0; i < slaves_.size(); ++i) {
    Event e;
    e.t = now_ + 10'000 * (i + 1);
    e.kind = EventKind::Reconnect;
    e.slave = i;
    push(std::move(e));
  }
  {
    Event e;
    e.t = now_ + 10'000 * (slaves_.size() + 10);
    e.kind = EventKind::StartRun;
    push(std::move(e));
  }
  for (std::size_t i = 0; i < slaves_.size(); ++i) {
    Event e;
    e.t = now_ + spec_.pump_interval_us;
    e.kind = EventKind::Pump;
    e.slave = i;
    push(std::move(e));
  }
  push(Event::at(now_ + kMasterTickUs, EventKind::MasterTick));

  double outage_s = 0.0;
  for (const auto& d : spec_.faults.drops) outage_s += d.duration_s;
  const auto horizon = kSimEpochUs + static_cast<std::uint64_t>(
      (spec_.config.duration_s + outage_s + 180.0) * 1e6);

  SimulationResult result;
  result.seed = spec_.seed;

  while (!queue_.empty() && !finished_) {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.t;
    if (now_ > horizon) break;

    switch (e.kind) {
      case EventKind::Poll: {
        auto& s = *slaves_[e.slave];
        s.clock->set_true(now_);
        s.node->poll(*s.clock);
        schedule_poll(s);
        break;
      }
      case EventKind::Pump:
        pump(*slaves_[e.slave]);
        e.t = now_ + spec_.pump_interval_us;
        push(std::move(e));
        break;
      case EventKind::Deliver:
        deliver(e);
        break;
      case EventKind::MasterTick:
        dispatch(coord_->on_timer(now_));
        if (!drops_scheduled_ && run_id_) {
          const auto* sess = coord_->session(*run_id_);
          if (sess->start_us) {
            drops_scheduled_ = true;
            for (const auto& d : spec_.faults.drops) {
              for (std::size_t i = 0; i < slaves_.size(); ++i) {
                if (d.slave_id && *d.slave_id != slaves_[i]->id) continue;
                const auto at = sess->start_us + static_cast<std::uint64_t>(d.start_s * 1e6);
                push(Event::at(at, EventKind::LinkDown, i));
                push(Event::at(at + static_cast<std::uint64_t>(d.duration_s * 1e6), EventKind::LinkUp, i));
              }
            }
            if (spec_.stop_after_s) {
              push(Event::at(sess->start_us + static_cast<std::uint64_t>(*spec_.stop_after_s * 1e6),
                             EventKind::StopRun));
            }
          }
        }
        e.t = now_ + kMasterTickUs;
        push(std::move(e));
        break;
      case EventKind::Reconnect:
        try_reconnect(*slaves_[e.slave]);
        break;
      case EventKind::LinkDown:
        link_down(*slaves_[e.slave]);
        break;
      case EventKind::LinkUp:
        if (slaves_[e.slave]->link_down_depth > 0) --slaves_[e.slave]->link_down_depth;
        break;
      case EventKind::StartRun: {
        std::vector<master::Outbound> out;
        try {
          run_id_ = coord_->start_run(spec_.config, now_, out);
        } catch (const master::RunError& err) {
          result.session.status = master::RunStatus::Aborted;
          result.session.error = err.what();
          return result;
        }
        dispatch(out);
        break;
      }
      case EventKind::StopRun:
        if (run_id_) {
          try {
            dispatch(coord_->stop_run(*run_id_, now_));
          } catch (const master::RunError&) {
          }
        }
        break;
    }
  }

  if (!run_id_) {
    result.session.status = master::RunStatus::Aborted;
    result.session.error = "run never started";
    return result;
  }
  result.session = *coord_->session(*run_id_);
  if (result.session.active()) {
    result.session.status = master::RunStatus::Aborted;
    result.session.error = "simulation horizon reached before the run completed";
  }
  result.dataset = *coord_->dataset(*run_id_);
  result.integrity = master::integrity_report(result.dataset);
  result.transport = transport_;
  result.protocol_warnings = coord_->protocol_warnings();
  result.simulated_s = static_cast<double>(now_ - kSimEpochUs) / 1e6;

  for (const auto& s : slaves_) {
    SlaveReport r;
    r.slave_id = s->id;
    if (auto sum = s->node->last_summary()) {
      r.ticks = sum->ticks;
      r.max_lateness_us = sum->max_lateness_us;
      r.mean_lateness_us = sum->mean_lateness_us;
      r.mean_intra_tick_skew_us = sum->mean_intra_tick_skew_us;
    }
    r.overflow_dropped = s->node->overflow_dropped();
    r.overflow_gaps = s->node->overflow_gaps();
    r.buffer_high_watermark = s->node->buffer_high_watermark();
    const auto& osc = s->clock->model();
    const std::uint64_t at = result.session.start_us ? result.session.start_us : now_;
    r.true_offset_us = static_cast<std::int64_t>(osc.local(at)) - static_cast<std::int64_t>(at);
    if (auto it = result.session.offsets.find(s->id); it != result.session.offsets.end()) {
      r.estimated_offset_us = it->second.offset_us;
    }
    r.drift_ppm = osc.drift_ppm;
    r.reconnects = s->reconnects > 0 ? s->reconnects - 1 : 0;
    result.slaves.push_back(r);
  }
  return result;
}

}  // namespace

SimulationResult run_simulation(const SimulationSpec& spec) {
  World world(spec);
  return world.run();
}

}  // namespace vibedaq::sim
