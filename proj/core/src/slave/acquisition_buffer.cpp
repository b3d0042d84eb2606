#include "vibedaq/slave/acquisition_buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace vibedaq::slave {

AcquisitionBuffer::AcquisitionBuffer(std::vector<std::uint8_t> mux_channels,
                                     std::size_t capacity_per_sensor)
    : capacity_(capacity_per_sensor) {
  if (capacity_ == 0) throw std::invalid_argument("buffer capacity must be positive");
  for (auto m : mux_channels) queues_[m];
}

void AcquisitionBuffer::drop_front_locked(std::uint8_t mux, std::deque<SampleRecord>& q) {
  const auto seq = q.front().seq;
  q.pop_front();
  --occupancy_;
  ++dropped_;
  // Extend the newest gap of this sensor when the drop is contiguous with it.
  for (auto it = gaps_.rbegin(); it != gaps_.rend(); ++it) {
    if (it->mux_channel != mux) continue;
    if (it->seq_start + it->length == seq) {
      ++it->length;
      return;
    }
    break;
  }
  gaps_.push_back({mux, seq, 1});
}

void AcquisitionBuffer::push(std::uint8_t mux, const SampleRecord& rec) {
  std::lock_guard lock(mu_);
  auto& q = queues_.at(mux);
  if (q.size() >= capacity_) drop_front_locked(mux, q);
  q.push_back(rec);
  ++occupancy_;
  high_watermark_ = std::max(high_watermark_, occupancy_);
}

std::optional<PendingBatch> AcquisitionBuffer::take_batch(std::size_t max_records) {
  std::lock_guard lock(mu_);
  std::deque<SampleRecord>* best = nullptr;
  std::uint8_t best_mux = 0;
  for (auto& [mux, q] : queues_) {
    if (q.empty()) continue;
    if (!best || q.front().t_local_us < best->front().t_local_us) {
      best = &q;
      best_mux = mux;
    }
  }
  if (!best || max_records == 0) return std::nullopt;

  PendingBatch out;
  out.mux_channel = best_mux;
  const std::size_t n = std::min(max_records, best->size());
  out.records.assign(best->begin(), best->begin() + static_cast<std::ptrdiff_t>(n));
  best->erase(best->begin(), best->begin() + static_cast<std::ptrdiff_t>(n));
  occupancy_ -= n;
  return out;
}

void AcquisitionBuffer::restore(PendingBatch batch) {
  std::lock_guard lock(mu_);
  auto& q = queues_.at(batch.mux_channel);
  q.insert(q.begin(), batch.records.begin(), batch.records.end());
  occupancy_ += batch.records.size();
  while (q.size() > capacity_) drop_front_locked(batch.mux_channel, q);
  high_watermark_ = std::max(high_watermark_, occupancy_);
}

std::size_t AcquisitionBuffer::occupancy() const {
  std::lock_guard lock(mu_);
  return occupancy_;
}

std::size_t AcquisitionBuffer::occupancy(std::uint8_t mux) const {
  std::lock_guard lock(mu_);
  return queues_.at(mux).size();
}

std::size_t AcquisitionBuffer::high_watermark() const {
  std::lock_guard lock(mu_);
  return high_watermark_;
}

std::uint64_t AcquisitionBuffer::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

std::vector<GapRecord> AcquisitionBuffer::gaps() const {
  std::lock_guard lock(mu_);
  return gaps_;
}

}  // namespace vibedaq::slave
