#include "vibedaq/master/live.hpp"

namespace vibedaq::master {

LiveFrame LiveTap::next(const RunDataset& ds, std::uint64_t now_us) {
  LiveFrame frame;
  frame.t_us = now_us;
  const int range = ds.config().range_g;

  for (const auto& [id, series] : ds.sensors()) {
    auto& cur = cursors_[id];
    const std::uint64_t extent = series.extent();

    for (; cur.scanned < extent; ++cur.scanned) {
      const bool have = series.at(static_cast<std::uint32_t>(cur.scanned)) != nullptr;
      if (!have && !cur.in_gap) ++cur.gaps;
      cur.in_gap = !have;
    }

    std::vector<std::uint32_t> fresh;
    for (std::uint64_t seq = cur.emitted; seq < extent; ++seq) {
      if (series.at(static_cast<std::uint32_t>(seq))) fresh.push_back(static_cast<std::uint32_t>(seq));
    }
    cur.emitted = extent;

    std::vector<std::uint32_t> picked;
    if (fresh.size() <= max_points_) {
      picked = std::move(fresh);
    } else {
      for (std::size_t i = 0; i < max_points_; ++i) picked.push_back(fresh[i * fresh.size() / max_points_]);
    }

    for (auto axis : kAxes) {
      auto& values = frame.channels[channel_label({id.slave_id, id.mux_channel, axis})];
      values.reserve(picked.size());
      for (auto seq : picked) {
        values.push_back(raw_to_g(series.at(seq)->raw[static_cast<std::size_t>(axis)], range));
      }
    }

    SensorHealth h;
    h.gaps = cur.gaps;
    const auto* first = series.first();
    const auto* last = series.last();
    if (series.received() >= 2 && last->t_master_us > first->t_master_us) {
      h.rate_hz = static_cast<double>(series.received() - 1) * 1e6 /
                  static_cast<double>(last->t_master_us - first->t_master_us);
    }
    frame.health[sensor_label(id)] = h;
  }
  return frame;
}

}  // namespace vibedaq::master
