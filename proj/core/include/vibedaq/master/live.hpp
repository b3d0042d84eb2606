#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vibedaq/master/dataset.hpp"

namespace vibedaq::master {

struct SensorHealth {
  double rate_hz = 0.0;
  std::uint64_t gaps = 0;
};

/// One frame of the live monitoring feed.
struct LiveFrame {
  std::uint64_t t_us = 0;
  /// Channel label -> decimated g values received since the previous frame.
  std::map<std::string, std::vector<double>> channels;
  /// Sensor label -> health summary.
  std::map<std::string, SensorHealth> health;
};

/// Builds successive live frames from a growing dataset. Each frame carries
/// only samples that arrived since the previous one, thinned to at most
/// `max_points` per channel.
class LiveTap {
 public:
  explicit LiveTap(std::size_t max_points = 32) : max_points_(max_points) {}

  LiveFrame next(const RunDataset& ds, std::uint64_t now_us);
  void reset() { cursors_.clear(); }

 private:
  struct Cursor {
    std::uint64_t emitted = 0;  // next seq to emit
    std::uint64_t scanned = 0;  // holes below this seq are counted
    std::uint64_t gaps = 0;
    bool in_gap = false;
  };
  std::size_t max_points_;
  std::map<SensorId, Cursor> cursors_;
};

}  // namespace vibedaq::master
