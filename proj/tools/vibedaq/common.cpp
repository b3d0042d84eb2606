#include <csignal>
#include <pthread.h>
#include <set>

#include "commands.hpp"

namespace vibedaq::cli {

std::vector<std::uint8_t> parse_mux_list(const std::string& text) {
  std::vector<std::uint8_t> out;
  std::set<int> seen;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || v < 0 || v > 7) {
      throw UsageError("invalid mux channel '" + item + "' (expected 0..7)");
    }
    if (!seen.insert(v).second) throw UsageError("duplicate mux channel " + item);
    out.push_back(static_cast<std::uint8_t>(v));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

namespace {
sigset_t termination_set() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}
}  // namespace

void block_termination_signals() {
  const auto set = termination_set();
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

int wait_termination_signal() {
  const auto set = termination_set();
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

}  // namespace vibedaq::cli
