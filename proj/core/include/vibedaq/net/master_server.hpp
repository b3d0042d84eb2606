#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vibedaq/core/clock.hpp"
#include "vibedaq/master/coordinator.hpp"
#include "vibedaq/net/endpoint.hpp"

namespace vibedaq::net {

struct MasterServerOptions {
  HostPort listen{"0.0.0.0", 7400};
  /// HTTP/WS API; disabled when empty.
  std::optional<HostPort> api = HostPort{"127.0.0.1", 8080};
  std::filesystem::path out_dir = ".";
  /// Appended to the CSV metadata line (simulated runs).
  std::optional<std::uint64_t> seed;
  std::uint64_t live_interval_us = 100'000;
};

/// Snapshot of a finished run, kept for the API and for embedding callers.
struct FinishedRun {
  master::RunSession session;
  std::filesystem::path csv;
  std::string csv_error;
};

/// TCP master daemon: one thread per slave connection feeding a single
/// Coordinator, a timer thread, and the HTTP/WS control API.
class MasterServer {
 public:
  MasterServer(MasterServerOptions options, Clock& clock);
  ~MasterServer();

  MasterServer(const MasterServer&) = delete;
  MasterServer& operator=(const MasterServer&) = delete;

  /// Binds both listeners and starts serving. Throws std::system_error when
  /// a port is unavailable.
  void start();
  void stop();

  std::uint16_t data_port() const { return data_port_; }
  std::uint16_t api_port() const { return api_port_; }

  /// Thread-safe run control, shared by the API and embedding callers.
  std::uint32_t start_run(const AcquisitionConfig& cfg);
  void stop_run(std::uint32_t run_id);

  std::size_t connected_slaves() const;
  /// Blocks until the run finishes or the timeout passes.
  std::optional<FinishedRun> wait_finished(std::uint32_t run_id, std::chrono::milliseconds timeout);

  /// Runs `fn` with the coordinator locked.
  void with_coordinator(const std::function<void(master::Coordinator&)>& fn);
  std::optional<FinishedRun> finished(std::uint32_t run_id) const;

 private:
  struct Connection;
  struct ApiServer;

  void accept_loop();
  void serve_connection(std::shared_ptr<Connection> conn);
  void timer_loop();
  void dispatch(const std::vector<master::Outbound>& out);
  void on_run_finished(const master::RunSession& s, const master::RunDataset& ds);

  MasterServerOptions opts_;
  Clock& clock_;

  mutable std::mutex mu_;
  std::condition_variable finished_cv_;
  std::unique_ptr<master::Coordinator> coord_;
  std::map<std::uint8_t, std::shared_ptr<Connection>> by_slave_;
  std::map<std::uint32_t, FinishedRun> finished_;

  struct Io;
  std::unique_ptr<Io> io_;
  std::unique_ptr<ApiServer> api_;
  std::atomic<bool> running_{false};
  std::uint16_t data_port_ = 0;
  std::uint16_t api_port_ = 0;
  std::thread accept_thread_;
  std::thread timer_thread_;
  std::mutex conn_mu_;
  std::vector<std::thread> conn_threads_;
  std::vector<std::weak_ptr<Connection>> conns_;
};

}  // namespace vibedaq::net
