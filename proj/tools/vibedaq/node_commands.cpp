#include <atomic>
#include <csignal>
#include <pthread.h>
#include <spdlog/spdlog.h>
#include <thread>

#include "commands.hpp"
#include "vibedaq/net/master_server.hpp"
#include "vibedaq/net/slave_daemon.hpp"
#include "vibedaq/sensorbus/scenario.hpp"

namespace vibedaq::cli {

namespace {

net::HostPort host_port_or_usage(const std::string& text, const char* what) {
  try {
    return net::parse_host_port(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Command add_master(CLI::App& app, const GlobalOptions& g) {
  struct Opts {
    std::string listen = "0.0.0.0:7400";
    std::string api = "127.0.0.1:8080";
    bool no_api = false;
    std::string out_dir = ".";
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--listen", o->listen, "Slave data address host:port")->capture_default_str();
  app.add_option("--api", o->api, "HTTP/WS API address host:port")->capture_default_str();
  app.add_flag("--no-api", o->no_api, "Disable the HTTP/WS API");
  app.add_option("--out-dir", o->out_dir, "Directory for run CSV files")->capture_default_str();

  return [o, &g] {
    net::MasterServerOptions opts;
    opts.listen = host_port_or_usage(o->listen, "--listen");
    if (o->no_api) {
      opts.api.reset();
    } else {
      opts.api = host_port_or_usage(o->api, "--api");
    }
    opts.out_dir = o->out_dir;
    opts.seed = g.seed;

    block_termination_signals();
    SystemClock clock;
    net::MasterServer server(opts, clock);
    server.start();
    const int sig = wait_termination_signal();
    spdlog::info("signal {}: shutting down", sig);
    server.stop();
    return kExitOk;
  };
}

Command add_slave(CLI::App& app, const GlobalOptions& g) {
  struct Opts {
    int id = 1;
    std::string master = "127.0.0.1:7400";
    std::string sensors = "0,1,2";
    std::string scenario;
    double buffer_seconds = 10.0;
    double give_up_s = 60.0;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--id", o->id, "Slave id (1..255)")->required()->check(CLI::Range(1, 255));
  app.add_option("--master", o->master, "Master data address host:port")->capture_default_str();
  app.add_option("--sensors", o->sensors, "Comma-separated mux channels")->capture_default_str();
  app.add_option("--scenario", o->scenario, "Scenario file; default follows each run's test type")
      ->check(CLI::ExistingFile);
  app.add_option("--buffer-seconds", o->buffer_seconds, "Per-sensor buffer capacity")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--give-up-after", o->give_up_s, "Seconds without a master before exiting")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  return [o, &g] {
    net::SlaveDaemonOptions opts;
    opts.give_up_after = std::chrono::milliseconds(static_cast<std::int64_t>(o->give_up_s * 1000.0));
    opts.node.slave_id = static_cast<std::uint8_t>(o->id);
    opts.node.mux_channels = parse_mux_list(o->sensors);
    opts.node.buffer_seconds = o->buffer_seconds;
    opts.master = host_port_or_usage(o->master, "--master");

    bus::ModalScenario scenario = bus::tvt_preset();
    if (!o->scenario.empty()) {
      try {
        scenario = bus::load_scenario(o->scenario);
      } catch (const std::exception& e) {
        throw UsageError(e.what());
      }
      opts.preset_on_config = false;
    }
    const std::uint64_t seed = g.seed.value_or(1) * 1000 + static_cast<std::uint64_t>(o->id);
    bus::VirtualBus bus(std::move(scenario), opts.node.mux_channels, seed);

    block_termination_signals();
    SystemClock clock;
    net::SlaveDaemon daemon(opts, bus, clock);
    std::atomic<bool> finished{false};
    std::thread waiter([&] {
      wait_termination_signal();
      if (finished) return;
      spdlog::info("shutting down");
      daemon.stop();
    });
    const int rc = daemon.run();
    finished = true;
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return rc == 0 ? kExitOk : kExitAbort;
  };
}

}  // namespace vibedaq::cli
