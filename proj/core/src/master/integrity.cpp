#include "vibedaq/master/integrity.hpp"

#include <algorithm>

namespace vibedaq::master {

std::uint64_t IntegrityReport::total_expected() const {
  std::uint64_t n = 0;
  for (const auto& c : channels) n += c.expected;
  return n;
}

std::uint64_t IntegrityReport::total_received() const {
  std::uint64_t n = 0;
  for (const auto& c : channels) n += c.received;
  return n;
}

std::uint64_t IntegrityReport::total_gaps() const {
  std::uint64_t n = 0;
  for (const auto& c : channels) n += c.gap_count;
  return n;
}

std::uint64_t IntegrityReport::total_missing() const {
  std::uint64_t n = 0;
  for (const auto& c : channels) n += c.missing;
  return n;
}

IntegrityReport integrity_report(const RunDataset& ds) {
  IntegrityReport report;
  for (const auto& [sensor, series] : ds.sensors()) {
    const std::uint64_t expected = ds.expected(sensor);
    const auto gaps = series.gaps(expected);

    ChannelIntegrity base;
    base.expected = expected;
    base.received = series.received();
    base.gap_count = gaps.size();
    for (const auto& g : gaps) {
      base.longest_gap = std::max(base.longest_gap, g.length);
      base.missing += g.length;
    }
    const auto* first = series.first();
    const auto* last = series.last();
    if (base.received >= 2 && last->t_master_us > first->t_master_us) {
      base.achieved_rate_hz = static_cast<double>(base.received - 1) * 1e6 /
                              static_cast<double>(last->t_master_us - first->t_master_us);
    } else {
      base.insufficient = true;
    }

    for (auto axis : kAxes) {
      ChannelIntegrity c = base;
      c.channel = {sensor.slave_id, sensor.mux_channel, axis};
      c.saturation = series.saturation(axis);
      report.channels.push_back(c);
    }
  }
  return report;
}

}  // namespace vibedaq::master
