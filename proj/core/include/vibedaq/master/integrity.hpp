#pragma once

#include <cstdint>
#include <vector>

#include "vibedaq/core/types.hpp"
#include "vibedaq/master/dataset.hpp"

namespace vibedaq::master {

struct ChannelIntegrity {
  ChannelId channel;
  std::uint64_t expected = 0;
  std::uint64_t received = 0;
  std::uint64_t gap_count = 0;
  std::uint64_t longest_gap = 0;
  std::uint64_t missing = 0;
  /// (received - 1) / (t_last - t_first); 0 with `insufficient` set when
  /// fewer than two samples arrived.
  double achieved_rate_hz = 0.0;
  bool insufficient = false;
  std::uint64_t saturation = 0;
};

struct IntegrityReport {
  std::vector<ChannelIntegrity> channels;

  std::uint64_t total_expected() const;
  std::uint64_t total_received() const;
  std::uint64_t total_gaps() const;
  std::uint64_t total_missing() const;
};

/// Per-channel counters, ordered by slave, mux, then axis.
IntegrityReport integrity_report(const RunDataset& ds);

}  // namespace vibedaq::master
