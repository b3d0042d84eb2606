#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "vibedaq/core/types.hpp"
#include "vibedaq/protocol/clock_offset.hpp"
#include "vibedaq/protocol/messages.hpp"

namespace vibedaq::master {

/// A contiguous run of missing sequence numbers.
struct Gap {
  std::uint32_t seq_start = 0;
  std::uint64_t length = 0;

  friend bool operator==(const Gap&, const Gap&) = default;
};

struct StoredSample {
  std::int64_t t_master_us = 0;
  std::array<std::int16_t, 3> raw{};
};

/// Samples of one sensor indexed by seq. Late batches land in place;
/// duplicates are ignored.
class SensorSeries {
 public:
  /// Returns false if the seq was already present.
  bool insert(std::uint32_t seq, const StoredSample& s);

  const StoredSample* at(std::uint32_t seq) const;
  std::uint64_t received() const { return received_; }
  /// One past the highest seq received, 0 when empty.
  std::uint64_t extent() const { return samples_.size(); }

  /// Missing ranges within [0, expected).
  std::vector<Gap> gaps(std::uint64_t expected) const;

  std::uint64_t saturation(Axis a) const { return saturation_[static_cast<std::size_t>(a)]; }
  const StoredSample* first() const;
  const StoredSample* last() const;

 private:
  std::vector<StoredSample> samples_;
  std::vector<bool> present_;
  std::uint64_t received_ = 0;
  std::array<std::uint64_t, 3> saturation_{};
};

struct IngestResult {
  std::uint64_t inserted = 0;
  std::uint64_t duplicates = 0;
};

/// All samples of one run, keyed by sensor.
class RunDataset {
 public:
  RunDataset() = default;
  RunDataset(AcquisitionConfig cfg, const std::vector<SensorId>& sensors);

  const AcquisitionConfig& config() const { return cfg_; }
  const std::map<SensorId, SensorSeries>& sensors() const { return sensors_; }
  const SensorSeries* series(SensorId s) const;
  bool has_slave(std::uint8_t slave_id) const;

  /// Shifts timestamps to the master clock and stores the records. Throws
  /// std::invalid_argument for a sensor outside the run.
  IngestResult ingest(const proto::DataBatch& batch, const proto::ClockOffset& offset);

  /// Records the tick count a slave reported at the end of its run.
  void set_expected(std::uint8_t slave_id, std::uint64_t ticks);
  /// Expected sample count for a sensor: the slave's reported tick count,
  /// or the received extent while the run is still going.
  std::uint64_t expected(SensorId s) const;
  /// Number of CSV rows: the largest expected count over all sensors.
  std::uint64_t row_count() const;

  std::uint64_t total_received() const;

 private:
  AcquisitionConfig cfg_;
  std::map<SensorId, SensorSeries> sensors_;
  std::map<std::uint8_t, std::uint64_t> expected_;
};

}  // namespace vibedaq::master
