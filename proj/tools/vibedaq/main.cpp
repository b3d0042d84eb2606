#include <iostream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace vibedaq::cli;

  CLI::App app{"vibedaq: distributed vibration acquisition and spectral analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_flag("-v,--verbose", g.verbose, "Debug logging")->configurable(false);
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for simulated excitation and faults");

  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](const char* name, const char* help, auto fn) {
    auto* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, fn(*sub, g));
  };
  add("master", "Run the master daemon", add_master);
  add("slave", "Run a slave node daemon", add_slave);
  add("simulate", "Run master and slaves in one process", add_simulate);
  add("analyze", "Compute ANPSD spectra and confidence intervals from run files", add_analyze);
  add("compare", "Compare peak-normalised TVT and AVT analyses", add_compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (*seed_opt) g.seed = seed;

  spdlog::set_default_logger(spdlog::stderr_color_mt("vibedaq"));
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

  for (auto& [sub, run] : commands) {
    if (!sub->parsed()) continue;
    try {
      return run();
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitAbort;
    }
  }
  return kExitUsage;
}
