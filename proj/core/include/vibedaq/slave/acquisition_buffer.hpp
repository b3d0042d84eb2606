#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "vibedaq/core/types.hpp"

namespace vibedaq::slave {

/// A contiguous range of sequence numbers dropped on buffer overflow.
struct GapRecord {
  std::uint8_t mux_channel = 0;
  std::uint32_t seq_start = 0;
  std::uint32_t length = 0;

  friend bool operator==(const GapRecord&, const GapRecord&) = default;
};

/// Records taken out of the buffer for transmission.
struct PendingBatch {
  std::uint8_t mux_channel = 0;
  std::vector<SampleRecord> records;
};

/// Bounded per-sensor sample queue between the polling loop and the network
/// sender. The producer never blocks: when a sensor's queue is full the
/// oldest record is dropped and logged as a gap. Thread-safe.
class AcquisitionBuffer {
 public:
  AcquisitionBuffer(std::vector<std::uint8_t> mux_channels, std::size_t capacity_per_sensor);

  void push(std::uint8_t mux, const SampleRecord& rec);

  /// Removes up to max_records of the sensor whose oldest pending record is
  /// oldest overall. Returns nullopt when empty.
  std::optional<PendingBatch> take_batch(std::size_t max_records);
  /// Puts an unsent batch back at the front. Anything that no longer fits is
  /// dropped oldest-first and logged.
  void restore(PendingBatch batch);

  std::size_t occupancy() const;
  std::size_t occupancy(std::uint8_t mux) const;
  std::size_t capacity_per_sensor() const { return capacity_; }
  std::size_t high_watermark() const;
  std::uint64_t dropped() const;
  std::vector<GapRecord> gaps() const;
  bool empty() const { return occupancy() == 0; }

 private:
  void drop_front_locked(std::uint8_t mux, std::deque<SampleRecord>& q);

  mutable std::mutex mu_;
  std::size_t capacity_;
  std::map<std::uint8_t, std::deque<SampleRecord>> queues_;
  std::size_t occupancy_ = 0;
  std::size_t high_watermark_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<GapRecord> gaps_;
};

}  // namespace vibedaq::slave
