#include "vibedaq/sensorbus/bus.hpp"

#include <algorithm>
#include <bit>

namespace vibedaq::bus {

VirtualBus::VirtualBus(ModalScenario scenario, std::vector<std::uint8_t> mux_channels,
                       std::uint64_t seed)
    : scenario_(std::move(scenario)), scenario_mux_(std::move(mux_channels)), seed_(seed) {
  for (const auto mux : scenario_mux_) attach(mux, std::make_unique<ImuDevice>());
}

void VirtualBus::attach(std::uint8_t channel, std::unique_ptr<ImuDevice> device) {
  channels_.at(channel) = std::move(device);
}

void VirtualBus::detach(std::uint8_t channel) { channels_.at(channel).reset(); }

std::uint64_t VirtualBus::saturation_count() const {
  std::uint64_t n = 0;
  for (const auto& d : channels_) {
    if (d) n += d->saturation_count();
  }
  return n;
}

ImuDevice& VirtualBus::selected(std::uint8_t device_addr) {
  if (std::popcount(control_) != 1) {
    throw BusError(BusErrorKind::Contention,
                   control_ == 0 ? "no multiplexer channel enabled"
                                 : "multiple multiplexer channels enabled");
  }
  const auto channel = static_cast<std::size_t>(std::countr_zero(control_));
  auto& dev = channels_[channel];
  if (!dev || dev->address() != device_addr) {
    throw BusError(BusErrorKind::NotAcknowledged,
                   "no device at address on mux channel " + std::to_string(channel));
  }
  return *dev;
}

void VirtualBus::read_burst(std::uint8_t device_addr, std::uint8_t start_reg,
                            std::span<std::uint8_t> out) {
  auto& dev = selected(device_addr);
  ++transactions_;
  if (dev.read(start_reg, out) != RegisterAccess::Ok) {
    throw BusError(BusErrorKind::UnmappedRegister, "read of unmapped register");
  }
}

void VirtualBus::write_register(std::uint8_t device_addr, std::uint8_t r, std::uint8_t value) {
  auto& dev = selected(device_addr);
  ++transactions_;
  if (dev.write(r, value) != RegisterAccess::Ok) {
    throw BusError(BusErrorKind::UnmappedRegister, "write to unmapped or read-only register");
  }
  if (r == reg::CTRL1_XL) rebuild_engine(odr_from_ctrl1(value));
}

void VirtualBus::set_scenario(ModalScenario scenario) {
  scenario_ = std::move(scenario);
  engine_.reset();
  engine_odr_mhz_ = 0;
}

void VirtualBus::rebuild_engine(std::uint32_t odr_mhz) {
  if (!scenario_ || odr_mhz == 0) return;
  // Every sensor on the bus is programmed identically; only rebuild once
  // per configuration pass.
  if (engine_ && engine_odr_mhz_ == odr_mhz && engine_->tick() == 0) return;

  const double odr_hz = static_cast<double>(odr_mhz) / 1000.0;
  ModalScenario s = *scenario_;
  std::erase_if(s.modes, [&](const Mode& m) { return m.f_hz >= odr_hz / 2.0; });
  engine_ = std::make_unique<ScenarioEngine>(std::move(s), odr_hz, scenario_mux_, seed_ + builds_);
  engine_odr_mhz_ = odr_mhz;
  ++builds_;
}

void VirtualBus::sync(std::uint64_t /*t_local_us*/) {
  if (!engine_) return;
  engine_->advance();
  const auto& mux = engine_->mux_channels();
  for (std::size_t i = 0; i < mux.size(); ++i) {
    if (auto& dev = channels_[mux[i]]) dev->latch_g(engine_->sample_g(i));
  }
}

}  // namespace vibedaq::bus
