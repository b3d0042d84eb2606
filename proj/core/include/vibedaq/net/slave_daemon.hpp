#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>

#include "vibedaq/core/clock.hpp"
#include "vibedaq/net/endpoint.hpp"
#include "vibedaq/sensorbus/bus.hpp"
#include "vibedaq/slave/slave_node.hpp"

namespace vibedaq::net {

struct SlaveDaemonOptions {
  slave::SlaveOptions node;
  HostPort master{"127.0.0.1", 7400};
  /// Load the preset matching each CONFIG's test type into the bus.
  bool preset_on_config = true;
  std::chrono::milliseconds give_up_after{60'000};
  std::chrono::milliseconds backoff_min{500};
  std::chrono::milliseconds backoff_max{8'000};
  std::chrono::milliseconds send_interval{20};
};

/// TCP driver for a SlaveNode: an acquisition thread on `clock`, a reader
/// thread per connection, and the sender loop on the calling thread.
class SlaveDaemon {
 public:
  static constexpr int kUnreachable = 3;

  SlaveDaemon(SlaveDaemonOptions options, bus::VirtualBus& bus, Clock& clock);
  ~SlaveDaemon();

  SlaveDaemon(const SlaveDaemon&) = delete;
  SlaveDaemon& operator=(const SlaveDaemon&) = delete;

  /// Blocks until stop() (returns 0) or until the master has been
  /// unreachable for give_up_after (returns kUnreachable).
  int run();
  void stop();

  slave::SlaveNode& node() { return node_; }
  std::uint64_t reconnects() const { return reconnects_.load(); }

 private:
  struct Link;

  void acquisition_loop();
  void reader_loop(const std::shared_ptr<Link>& link);
  bool handle(const std::shared_ptr<Link>& link, const proto::Message& msg);
  void stream(const std::shared_ptr<Link>& link);
  void pause(std::chrono::milliseconds d);

  SlaveDaemonOptions opts_;
  bus::VirtualBus& bus_;
  Clock& clock_;
  slave::SlaveNode node_;

  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> reconnects_{0};
  std::mutex wait_mu_;
  std::condition_variable wait_cv_;
  std::mutex link_mu_;
  std::shared_ptr<Link> link_;
};

}  // namespace vibedaq::net
