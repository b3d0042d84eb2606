#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <spdlog/spdlog.h>
#include <thread>

#include "commands.hpp"
#include "vibedaq/net/master_server.hpp"
#include "vibedaq/net/slave_daemon.hpp"
#include "vibedaq/sim/artifacts.hpp"
#include "vibedaq/sim/simulation.hpp"

namespace vibedaq::cli {

namespace {

struct SimOpts {
  std::size_t slaves = 2;
  std::size_t sensors_per_slave = 3;
  std::string test_type = "TVT";
  double fs_hz = 208.0;
  int range_g = 2;
  std::uint32_t duration_s = 60;
  std::string scenario;
  double loss = 0.0;
  std::vector<std::string> drops;
  double stop_after_s = -1.0;
  double buffer_seconds = 10.0;
  std::string out_dir = ".";
  bool realtime = false;
  std::string api;
};

/// "START:DUR" or "START:DUR@SLAVE", in seconds from the scheduled start.
sim::DropWindow parse_drop(const std::string& text) {
  sim::DropWindow w;
  std::string body = text;
  if (const auto at = body.find('@'); at != std::string::npos) {
    try {
      const int id = std::stoi(body.substr(at + 1));
      if (id < 1 || id > 255) throw std::out_of_range("slave");
      w.slave_id = static_cast<std::uint8_t>(id);
    } catch (const std::exception&) {
      throw UsageError("invalid slave in drop window '" + text + "'");
    }
    body.resize(at);
  }
  const auto colon = body.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument("colon");
    std::size_t a = 0;
    std::size_t b = 0;
    w.start_s = std::stod(body.substr(0, colon), &a);
    w.duration_s = std::stod(body.substr(colon + 1), &b);
    if (a != colon || b != body.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw UsageError("drop window must be START:DUR[@SLAVE], got '" + text + "'");
  }
  if (w.start_s < 0 || w.duration_s <= 0) throw UsageError("drop window times must be positive: '" + text + "'");
  return w;
}

sim::SimulationSpec build_spec(const SimOpts& o, const GlobalOptions& g) {
  sim::SimulationSpec spec;
  spec.slaves = o.slaves;
  spec.sensors_per_slave = o.sensors_per_slave;
  const auto tt = parse_test_type(o.test_type);
  if (!tt) throw UsageError("test type must be TVT or AVT");
  spec.config.test_type = *tt;
  spec.config.odr_hz = o.fs_hz;
  spec.config.range_g = o.range_g;
  spec.config.duration_s = o.duration_s;
  if (auto errs = validate_config(spec.config); !errs.empty()) throw UsageError("invalid config: " + errs.front());
  if (!o.scenario.empty()) {
    try {
      spec.scenario = bus::load_scenario(o.scenario);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  spec.seed = g.seed.value_or(1);
  spec.faults.loss_probability = o.loss;
  for (const auto& d : o.drops) spec.faults.drops.push_back(parse_drop(d));
  spec.buffer_seconds = o.buffer_seconds;
  if (o.stop_after_s >= 0) spec.stop_after_s = o.stop_after_s;
  try {
    sim::validate_spec(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return spec;
}

void print_report(const master::RunSession& s, const master::IntegrityReport& r, std::uint64_t rows,
                  const std::filesystem::path& csv) {
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& c : r.channels) {
    if (c.insufficient) continue;
    lo = first ? c.achieved_rate_hz : std::min(lo, c.achieved_rate_hz);
    hi = first ? c.achieved_rate_hz : std::max(hi, c.achieved_rate_hz);
    first = false;
  }
  std::cout << "run " << s.run_id << ": " << master::to_string(s.status);
  if (!s.error.empty()) std::cout << " (" << s.error << ")";
  std::cout << "\n  channels " << r.channels.size() << ", rows " << rows << ", received "
            << r.total_received() << "/" << r.total_expected() << ", gaps " << r.total_gaps() << "\n";
  if (!first) std::printf("  achieved rate %.3f..%.3f Hz\n", lo, hi);
  if (!csv.empty()) std::cout << "  wrote " << csv.string() << "\n";
}

int run_virtual(const sim::SimulationSpec& spec, const SimOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = sim::run_simulation(spec);
  const auto paths = sim::write_artifacts(res, o.out_dir);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  print_report(res.session, res.integrity, res.dataset.row_count(), paths.csv);
  std::printf("  seed %llu, simulated %.1f s in %.2f s wall\n", static_cast<unsigned long long>(res.seed),
              res.simulated_s, wall);
  if (res.deficit() > 0) {
    std::cout << "  deficit " << res.deficit() << ", explained " << res.explained_loss() << " (transport "
              << res.transport.samples_lost() << ")\n";
  }
  return res.ok() ? kExitOk : kExitAbort;
}

/// Master and slaves as real daemons over loopback TCP on the wall clock.
int run_realtime(const sim::SimulationSpec& spec, const SimOpts& o) {
  if (spec.faults.loss_probability > 0 || !spec.faults.drops.empty()) {
    throw UsageError("fault injection is only available in virtual-time mode");
  }
  SystemClock clock;
  net::MasterServerOptions mopts;
  mopts.listen = {"127.0.0.1", 0};
  if (o.api.empty()) {
    mopts.api.reset();
  } else {
    try {
      mopts.api = net::parse_host_port(o.api);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--api: ") + e.what());
    }
  }
  mopts.out_dir = o.out_dir;
  mopts.seed = spec.seed;
  net::MasterServer server(mopts, clock);
  server.start();

  std::mt19937_64 rng(spec.seed);
  const auto scenario = spec.scenario.value_or(bus::preset_for(spec.config.test_type));
  std::vector<std::unique_ptr<bus::VirtualBus>> buses;
  std::vector<std::unique_ptr<net::SlaveDaemon>> daemons;
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < spec.slaves; ++i) {
    net::SlaveDaemonOptions sopts;
    sopts.node.slave_id = static_cast<std::uint8_t>(i + 1);
    sopts.node.mux_channels.clear();
    for (std::size_t m = 0; m < spec.sensors_per_slave; ++m) sopts.node.mux_channels.push_back(static_cast<std::uint8_t>(m));
    sopts.node.buffer_seconds = spec.buffer_seconds;
    sopts.master = {"127.0.0.1", server.data_port()};
    sopts.preset_on_config = false;
    buses.push_back(std::make_unique<bus::VirtualBus>(scenario, sopts.node.mux_channels, rng()));
    daemons.push_back(std::make_unique<net::SlaveDaemon>(sopts, *buses.back(), clock));
  }
  for (auto& d : daemons) threads.emplace_back([&d] { d->run(); });
  auto shutdown = [&] {
    for (auto& d : daemons) d->stop();
    for (auto& t : threads) t.join();
    server.stop();
  };

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (server.connected_slaves() < spec.slaves && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  if (server.connected_slaves() < spec.slaves) {
    shutdown();
    throw std::runtime_error("slaves did not connect");
  }

  std::uint32_t id = 0;
  try {
    id = server.start_run(spec.config);
  } catch (...) {
    shutdown();
    throw;
  }
  if (spec.stop_after_s) {
    std::this_thread::sleep_for(std::chrono::duration<double>(*spec.stop_after_s + 2.5));
    try {
      server.stop_run(id);
    } catch (const std::exception& e) {
      spdlog::warn("stop: {}", e.what());
    }
  }
  const auto fin = server.wait_finished(id, std::chrono::seconds(spec.config.duration_s + 90));

  master::IntegrityReport report;
  std::uint64_t rows = 0;
  server.with_coordinator([&](master::Coordinator& c) {
    if (auto r = c.integrity(id)) report = *r;
    if (const auto* ds = c.dataset(id)) rows = ds->row_count();
  });
  shutdown();
  if (!fin) throw std::runtime_error("run " + std::to_string(id) + " did not finish in time");

  std::filesystem::create_directories(o.out_dir);
  std::ofstream(std::filesystem::path(o.out_dir) / "integrity.json") << sim::integrity_json(fin->session, report);
  print_report(fin->session, report, rows, fin->csv);
  if (!fin->csv_error.empty()) throw std::runtime_error(fin->csv_error);
  return fin->session.status == master::RunStatus::Complete ? kExitOk : kExitAbort;
}

}  // namespace

Command add_simulate(CLI::App& app, const GlobalOptions& g) {
  auto o = std::make_shared<SimOpts>();
  app.add_option("--slaves", o->slaves, "Number of slaves")->capture_default_str()->check(CLI::Range(1, 255));
  app.add_option("--sensors-per-slave", o->sensors_per_slave, "Sensors per slave")
      ->capture_default_str()
      ->check(CLI::Range(1, 8));
  app.add_option("--test-type", o->test_type, "TVT or AVT")->capture_default_str();
  app.add_option("--fs", o->fs_hz, "Sampling rate in Hz")->capture_default_str();
  app.add_option("--range", o->range_g, "Full scale in g (2, 4, 8, 16)")->capture_default_str();
  app.add_option("--duration", o->duration_s, "Run length in seconds")->capture_default_str();
  app.add_option("--scenario", o->scenario, "Scenario file; default is the test type's preset")
      ->check(CLI::ExistingFile);
  app.add_option("--loss", o->loss, "Per-frame loss probability for data and heartbeat frames")
      ->capture_default_str();
  app.add_option("--drop-window", o->drops, "Link outage START:DUR[@SLAVE] in seconds (repeatable)");
  app.add_option("--stop-after", o->stop_after_s, "Send STOP this many seconds after the start");
  app.add_option("--buffer-seconds", o->buffer_seconds, "Slave buffer capacity in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", o->out_dir, "Directory for run artifacts")->capture_default_str();
  app.add_flag("--realtime", o->realtime, "Run real daemons over loopback TCP on the wall clock");
  app.add_option("--api", o->api, "With --realtime, also serve the HTTP/WS API on host:port");

  return [o, &g] {
    const auto spec = build_spec(*o, g);
    return o->realtime ? run_realtime(spec, *o) : run_virtual(spec, *o);
  };
}

}  // namespace vibedaq::cli
