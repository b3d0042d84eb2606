#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vibedaq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAbort = 3;

/// Thrown for bad option values discovered after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  bool verbose = false;
  std::optional<std::uint64_t> seed;
};

using Command = std::function<int()>;

Command add_master(CLI::App& app, const GlobalOptions& g);
Command add_slave(CLI::App& app, const GlobalOptions& g);
Command add_simulate(CLI::App& app, const GlobalOptions& g);
Command add_analyze(CLI::App& app, const GlobalOptions& g);
Command add_compare(CLI::App& app, const GlobalOptions& g);

/// Parses "0,1,2" into mux channels 0..7, rejecting duplicates.
std::vector<std::uint8_t> parse_mux_list(const std::string& text);

/// Blocks SIGINT/SIGTERM in every thread created afterwards so a single
/// waiter can collect them.
void block_termination_signals();
/// Waits for SIGINT or SIGTERM; returns the signal number.
int wait_termination_signal();

}  // namespace vibedaq::cli
