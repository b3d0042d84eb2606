#include "vibedaq/net/slave_daemon.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <array>
#include <boost/asio.hpp>
#include <spdlog/spdlog.h>
#include <thread>

#include "vibedaq/protocol/frame.hpp"
#include "vibedaq/sensorbus/scenario.hpp"

namespace vibedaq::net {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct SlaveDaemon::Link {
  asio::io_context ctx;
  tcp::socket sock{ctx};
  std::mutex write_mu;
  std::atomic<bool> alive{true};

  bool send(const proto::Message& msg) {
    const auto bytes = proto::encode_frame(msg);
    std::lock_guard lock(write_mu);
    boost::system::error_code ec;
    asio::write(sock, asio::buffer(bytes), ec);
    if (ec) close();
    return !ec;
  }

  void close() {
    alive = false;
    if (sock.is_open()) ::shutdown(sock.native_handle(), SHUT_RDWR);
  }
};

namespace {

/// Connects with a bounded wait so an unroutable master cannot stall the
/// retry schedule.
bool connect_with_timeout(tcp::socket& sock, asio::io_context& ctx, const HostPort& hp,
                          std::chrono::milliseconds timeout) {
  boost::system::error_code ec;
  tcp::resolver resolver(ctx);
  const auto endpoints = resolver.resolve(hp.host, std::to_string(hp.port), ec);
  if (ec) return false;
  bool done = false;
  asio::async_connect(sock, endpoints, [&](const boost::system::error_code& e, const tcp::endpoint&) {
    done = true;
    ec = e;
  });
  ctx.run_for(timeout);
  if (!done) {
    sock.close();
    ctx.restart();
    ctx.run();
    ctx.restart();
    return false;
  }
  ctx.restart();
  if (ec) return false;
  sock.set_option(tcp::no_delay(true), ec);
  return true;
}

}  // namespace

SlaveDaemon::SlaveDaemon(SlaveDaemonOptions options, bus::VirtualBus& bus, Clock& clock)
    : opts_(std::move(options)), bus_(bus), clock_(clock), node_(opts_.node, bus) {}

SlaveDaemon::~SlaveDaemon() { stop(); }

void SlaveDaemon::stop() {
  stopping_ = true;
  wait_cv_.notify_all();
  std::lock_guard lock(link_mu_);
  if (link_) link_->close();
}

void SlaveDaemon::pause(std::chrono::milliseconds d) {
  std::unique_lock lock(wait_mu_);
  wait_cv_.wait_for(lock, d, [this] { return stopping_.load(); });
}

void SlaveDaemon::acquisition_loop() {
  constexpr std::uint64_t kIdleStepUs = 5'000;
  constexpr std::uint64_t kMaxSleepUs = 50'000;
  while (!stopping_) {
    const auto due = node_.next_deadline();
    const auto now = clock_.now_us();
    if (!due) {
      clock_.sleep_until(now + kIdleStepUs);
      continue;
    }
    if (*due > now) {
      clock_.sleep_until(std::min(*due, now + kMaxSleepUs));
      continue;
    }
    node_.poll(clock_);
  }
}

bool SlaveDaemon::handle(const std::shared_ptr<Link>& link, const proto::Message& msg) {
  if (const auto* cfg = std::get_if<proto::Config>(&msg); cfg && opts_.preset_on_config) {
    const auto st = node_.state();
    // The bus is idle until START arms the acquisition loop.
    if (st == slave::SlaveState::Idle || st == slave::SlaveState::Configured) {
      bus_.set_scenario(bus::preset_for(cfg->config.test_type));
    }
  }
  for (const auto& reply : node_.on_message(msg, clock_)) {
    if (!link->send(reply)) return false;
  }
  return true;
}

void SlaveDaemon::reader_loop(const std::shared_ptr<Link>& link) {
  proto::FrameDecoder decoder;
  std::array<std::uint8_t, 16 * 1024> buf{};
  while (link->alive) {
    boost::system::error_code ec;
    const auto n = link->sock.read_some(asio::buffer(buf), ec);
    if (ec) break;
    decoder.feed(std::span<const std::uint8_t>(buf.data(), n));
    while (auto msg = decoder.next()) {
      if (!handle(link, *msg)) break;
    }
  }
  link->close();
  wait_cv_.notify_all();
}

void SlaveDaemon::stream(const std::shared_ptr<Link>& link) {
  while (link->alive && !stopping_) {
    while (auto msg = node_.next_outbound(clock_.now_us())) {
      if (!link->send(*msg)) {
        node_.send_failed();
        return;
      }
      node_.sent();
    }
    pause(opts_.send_interval);
  }
}

int SlaveDaemon::run() {
  std::thread acq([this] { acquisition_loop(); });
  auto backoff = opts_.backoff_min;
  auto unreachable_since = std::chrono::steady_clock::now();
  int rc = 0;
  bool ever_connected = false;

  while (!stopping_) {
    auto link = std::make_shared<Link>();
    if (!connect_with_timeout(link->sock, link->ctx, opts_.master, std::chrono::seconds(2))) {
      if (std::chrono::steady_clock::now() - unreachable_since >= opts_.give_up_after) {
        spdlog::error("master {} unreachable for {} s; giving up", opts_.master.str(),
                      std::chrono::duration_cast<std::chrono::seconds>(opts_.give_up_after).count());
        node_.abort_run();
        rc = kUnreachable;
        break;
      }
      spdlog::debug("connect to {} failed; retrying in {} ms", opts_.master.str(), backoff.count());
      pause(backoff);
      backoff = std::min(backoff * 2, opts_.backoff_max);
      continue;
    }
    if (ever_connected) ++reconnects_;
    ever_connected = true;
    backoff = opts_.backoff_min;
    spdlog::info("slave {} connected to {}", node_.id(), opts_.master.str());
    {
      std::lock_guard lock(link_mu_);
      link_ = link;
    }
    if (stopping_) link->close();

    std::thread reader;
    if (link->send(node_.hello())) {
      reader = std::thread([this, link] { reader_loop(link); });
      stream(link);
    }
    link->close();
    if (reader.joinable()) reader.join();
    {
      std::lock_guard lock(link_mu_);
      link_.reset();
    }
    node_.send_failed();
    if (!stopping_) spdlog::warn("slave {} lost the master connection", node_.id());
    unreachable_since = std::chrono::steady_clock::now();
  }

  stopping_ = true;
  acq.join();
  return rc;
}

}  // namespace vibedaq::net
