#include "vibedaq/slave/acquisition.hpp"

#include <algorithm>
#include <array>

namespace vibedaq::slave {

double SensorStats::mean_interval_us() const {
  if (samples < 2) return 0.0;
  return static_cast<double>(last_t_us - first_t_us) / static_cast<double>(samples - 1);
}

AcquisitionLoop::AcquisitionLoop(bus::I2cBus& bus, std::vector<std::uint8_t> mux_channels,
                                 AcquisitionConfig cfg, std::uint64_t start_local_us)
    : bus_(bus),
      cfg_(cfg),
      odr_mhz_(odr_millihertz(cfg.odr_hz)),
      start_us_(start_local_us),
      total_ticks_(ticks_per_run(cfg)) {
  std::sort(mux_channels.begin(), mux_channels.end());
  for (auto m : mux_channels) {
    SensorStats st;
    st.mux_channel = m;
    sensors_.push_back(st);
  }
}

std::size_t AcquisitionLoop::configure_sensors() {
  const auto code = bus::ctrl1_xl_code(odr_mhz_, cfg_.range_g);
  std::size_t live = 0;
  for (auto& s : sensors_) {
    try {
      bus_.mux_select(static_cast<std::uint8_t>(1u << s.mux_channel));
      std::array<std::uint8_t, 1> who{};
      bus_.read_burst(bus::kImuAddress, bus::reg::WHO_AM_I, who);
      if (who[0] != bus::kWhoAmIValue) {
        s.failed = true;
        s.failure = "unexpected WHO_AM_I";
        continue;
      }
      if (code) bus_.write_register(bus::kImuAddress, bus::reg::CTRL1_XL, *code);
      ++live;
    } catch (const bus::BusError& e) {
      s.failed = true;
      s.failure = e.what();
    }
  }
  return live;
}

std::uint64_t AcquisitionLoop::deadline(std::uint64_t k) const {
  return start_us_ + tick_offset_us(k, odr_mhz_);
}

bool AcquisitionLoop::done() const { return stop_.load() || k_ >= total_ticks_; }

std::optional<std::uint64_t> AcquisitionLoop::next_deadline() const {
  if (done()) return std::nullopt;
  return deadline(k_);
}

void AcquisitionLoop::poll_tick(Clock& clock, const SampleSink& sink) {
  if (done()) return;
  const std::uint64_t due = deadline(k_);
  std::uint64_t first_read = 0;
  std::uint64_t last_read = 0;
  bool any = false;

  bus_.sync(clock.now_us());
  for (auto& s : sensors_) {
    if (s.failed) continue;
    std::array<std::uint8_t, 6> raw{};
    const std::uint64_t t = clock.now_us();
    try {
      bus_.mux_select(static_cast<std::uint8_t>(1u << s.mux_channel));
      bus_.read_burst(bus::kImuAddress, bus::reg::OUTX_L_XL, raw);
    } catch (const bus::BusError& e) {
      s.failed = true;
      s.failure = e.what();
      continue;
    }
    SampleRecord rec;
    rec.seq = static_cast<std::uint32_t>(k_);
    rec.t_local_us = t;
    for (std::size_t a = 0; a < 3; ++a) {
      rec.raw[a] = static_cast<std::int16_t>(
          static_cast<std::uint16_t>(raw[2 * a] | (raw[2 * a + 1] << 8)));
    }
    if (s.samples == 0) s.first_t_us = t;
    s.last_t_us = t;
    ++s.samples;
    if (!any) first_read = t;
    last_read = t;
    any = true;
    sink(s.mux_channel, rec);
  }

  if (any) {
    const std::uint64_t late = first_read > due ? first_read - due : 0;
    max_lateness_us_ = std::max(max_lateness_us_, late);
    lateness_sum_us_ += static_cast<double>(late);
    skew_sum_us_ += static_cast<double>(last_read - first_read);
  }
  ++k_;
}

AcquisitionSummary AcquisitionLoop::summary() const {
  AcquisitionSummary s;
  s.ticks = k_;
  s.planned_ticks = total_ticks_;
  s.stopped_early = k_ < total_ticks_;
  s.sensors = sensors_;
  s.max_lateness_us = max_lateness_us_;
  if (k_ > 0) {
    s.mean_lateness_us = lateness_sum_us_ / static_cast<double>(k_);
    s.mean_intra_tick_skew_us = skew_sum_us_ / static_cast<double>(k_);
  }
  return s;
}

AcquisitionSummary run_acquisition(const AcquisitionConfig& cfg, bus::I2cBus& bus,
                                   const std::vector<std::uint8_t>& mux_channels, Clock& clock,
                                   const SampleSink& sink, const std::atomic<bool>& stop,
                                   std::uint64_t start_local_us) {
  AcquisitionLoop loop(bus, mux_channels, cfg, start_local_us);
  loop.configure_sensors();
  while (auto due = loop.next_deadline()) {
    if (stop.load()) {
      loop.request_stop();
      break;
    }
    clock.sleep_until(*due);
    loop.poll_tick(clock, sink);
  }
  return loop.summary();
}

}  // namespace vibedaq::slave
