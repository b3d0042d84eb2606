#include "vibedaq/master/dataset.hpp"

#include <algorithm>
#include <stdexcept>

namespace vibedaq::master {

namespace {

bool is_saturated(std::int16_t v) { return v == 32767 || v == -32768; }

}  // namespace

bool SensorSeries::insert(std::uint32_t seq, const StoredSample& s) {
  if (seq >= samples_.size()) {
    samples_.resize(static_cast<std::size_t>(seq) + 1);
    present_.resize(static_cast<std::size_t>(seq) + 1, false);
  }
  if (present_[seq]) return false;
  samples_[seq] = s;
  present_[seq] = true;
  ++received_;
  for (std::size_t a = 0; a < 3; ++a) {
    if (is_saturated(s.raw[a])) ++saturation_[a];
  }
  return true;
}

const StoredSample* SensorSeries::at(std::uint32_t seq) const {
  if (seq >= samples_.size() || !present_[seq]) return nullptr;
  return &samples_[seq];
}

const StoredSample* SensorSeries::first() const {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (present_[i]) return &samples_[i];
  }
  return nullptr;
}

const StoredSample* SensorSeries::last() const {
  for (std::size_t i = samples_.size(); i-- > 0;) {
    if (present_[i]) return &samples_[i];
  }
  return nullptr;
}

std::vector<Gap> SensorSeries::gaps(std::uint64_t expected) const {
  std::vector<Gap> out;
  std::optional<Gap> open;
  for (std::uint64_t seq = 0; seq < expected; ++seq) {
    const bool have = seq < present_.size() && present_[seq];
    if (!have) {
      if (!open) open = Gap{static_cast<std::uint32_t>(seq), 0};
      ++open->length;
    } else if (open) {
      out.push_back(*open);
      open.reset();
    }
  }
  if (open) out.push_back(*open);
  return out;
}

RunDataset::RunDataset(AcquisitionConfig cfg, const std::vector<SensorId>& sensors)
    : cfg_(cfg) {
  for (auto s : sensors) sensors_[s];
}

const SensorSeries* RunDataset::series(SensorId s) const {
  auto it = sensors_.find(s);
  return it == sensors_.end() ? nullptr : &it->second;
}

bool RunDataset::has_slave(std::uint8_t slave_id) const {
  return std::any_of(sensors_.begin(), sensors_.end(),
                     [&](const auto& kv) { return kv.first.slave_id == slave_id; });
}

IngestResult RunDataset::ingest(const proto::DataBatch& batch, const proto::ClockOffset& offset) {
  auto it = sensors_.find(SensorId{batch.slave_id, batch.mux_channel});
  if (it == sensors_.end()) {
    throw std::invalid_argument("batch for unknown sensor " +
                                sensor_label({batch.slave_id, batch.mux_channel}));
  }
  IngestResult r;
  std::uint32_t seq = batch.seq_first;
  for (const auto& rec : batch.records) {
    StoredSample s;
    s.t_master_us = offset.to_master(static_cast<std::int64_t>(rec.t_local_us));
    s.raw = {rec.x, rec.y, rec.z};
    if (it->second.insert(seq++, s)) {
      ++r.inserted;
    } else {
      ++r.duplicates;
    }
  }
  return r;
}

void RunDataset::set_expected(std::uint8_t slave_id, std::uint64_t ticks) {
  expected_[slave_id] = ticks;
}

std::uint64_t RunDataset::expected(SensorId s) const {
  auto it = expected_.find(s.slave_id);
  const auto* ser = series(s);
  const std::uint64_t extent = ser ? ser->extent() : 0;
  if (it == expected_.end()) return extent;
  return std::max(it->second, extent);
}

std::uint64_t RunDataset::row_count() const {
  std::uint64_t rows = 0;
  for (const auto& [id, ser] : sensors_) rows = std::max(rows, expected(id));
  return rows;
}

std::uint64_t RunDataset::total_received() const {
  std::uint64_t n = 0;
  for (const auto& [id, ser] : sensors_) n += ser.received();
  return n;
}

}  // namespace vibedaq::master
