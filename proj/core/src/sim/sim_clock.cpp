#include "vibedaq/sim/sim_clock.hpp"

#include <cmath>

namespace vibedaq::sim {

std::uint64_t OscillatorModel::local(std::uint64_t true_us) const {
  const double since = static_cast<double>(true_us) - static_cast<double>(epoch_us);
  const auto drift = static_cast<std::int64_t>(std::floor(since * drift_ppm * 1e-6));
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(true_us) + offset_us + drift);
}

std::uint64_t OscillatorModel::true_time(std::uint64_t local_us) const {
  const double scale = 1.0 + drift_ppm * 1e-6;
  const double guess = (static_cast<double>(local_us) - static_cast<double>(offset_us) +
                        drift_ppm * 1e-6 * static_cast<double>(epoch_us)) / scale;
  auto t = static_cast<std::uint64_t>(std::max(0.0, std::floor(guess)) );
  while (t > 0 && local(t - 1) >= local_us) --t;
  while (local(t) < local_us) ++t;
  return t;
}

void TimedBus::mux_select(std::uint8_t control_byte) {
  clock_.spend(transfer_us(2));  // address + control byte
  inner_.mux_select(control_byte);
}

void TimedBus::read_burst(std::uint8_t device_addr, std::uint8_t start_reg,
                          std::span<std::uint8_t> out) {
  clock_.spend(transfer_us(3 + out.size()));  // addr, reg, repeated start addr, data
  inner_.read_burst(device_addr, start_reg, out);
}

void TimedBus::write_register(std::uint8_t device_addr, std::uint8_t reg, std::uint8_t value) {
  clock_.spend(transfer_us(3));
  inner_.write_register(device_addr, reg, value);
}

}  // namespace vibedaq::sim
