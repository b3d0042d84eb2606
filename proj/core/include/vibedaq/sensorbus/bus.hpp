#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>
#include <span>
#include <stdexcept>
#include <string>

#include "vibedaq/sensorbus/imu_device.hpp"
#include "vibedaq/sensorbus/scenario.hpp"

namespace vibedaq::bus {

enum class BusErrorKind { Contention, NotAcknowledged, UnmappedRegister };

class BusError : public std::runtime_error {
 public:
  BusError(BusErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  BusErrorKind kind() const { return kind_; }

 private:
  BusErrorKind kind_;
};

/// Register-level view of an I2C bus behind an 8-channel multiplexer. A real
/// backend would wrap /dev/i2c-N; VirtualBus below is the simulated one.
class I2cBus {
 public:
  virtual ~I2cBus() = default;

  virtual void mux_select(std::uint8_t control_byte) = 0;
  virtual void read_burst(std::uint8_t device_addr, std::uint8_t start_reg,
                          std::span<std::uint8_t> out) = 0;
  virtual void write_register(std::uint8_t device_addr, std::uint8_t reg, std::uint8_t value) = 0;

  /// Informs the bus of the current local time before a polling tick.
  /// Hardware backends ignore it; the virtual bus advances its sensors.
  virtual void sync(std::uint64_t /*t_local_us*/) {}
};

inline constexpr std::uint8_t kMuxAddress = 0x70;
inline constexpr std::size_t kMuxChannels = 8;

class VirtualBus final : public I2cBus {
 public:
  /// Bare bus; attach devices by hand.
  VirtualBus() = default;

  /// Places an IMU on every listed channel. Once CTRL1_XL programs a data
  /// rate, a ScenarioEngine at that rate drives all of them, one scenario
  /// tick per sync(). Modes at or above half the rate are left out.
  VirtualBus(ModalScenario scenario, std::vector<std::uint8_t> mux_channels, std::uint64_t seed);

  void attach(std::uint8_t channel, std::unique_ptr<ImuDevice> device);
  /// Removes the device, e.g. to model a cable fault mid-run.
  void detach(std::uint8_t channel);

  /// Replaces the scenario used from the next CTRL1_XL write on.
  void set_scenario(ModalScenario scenario);

  ImuDevice* device(std::uint8_t channel) { return channels_.at(channel).get(); }
  ScenarioEngine* engine() { return engine_.get(); }

  std::uint8_t control_byte() const { return control_; }

  void mux_select(std::uint8_t control_byte) override { control_ = control_byte; }
  void read_burst(std::uint8_t device_addr, std::uint8_t start_reg,
                  std::span<std::uint8_t> out) override;
  void write_register(std::uint8_t device_addr, std::uint8_t reg, std::uint8_t value) override;
  void sync(std::uint64_t t_local_us) override;

  std::uint64_t transactions() const { return transactions_; }
  std::uint64_t saturation_count() const;

 private:
  ImuDevice& selected(std::uint8_t device_addr);
  void rebuild_engine(std::uint32_t odr_mhz);

  std::array<std::unique_ptr<ImuDevice>, kMuxChannels> channels_{};
  std::optional<ModalScenario> scenario_;
  std::vector<std::uint8_t> scenario_mux_;
  std::uint64_t seed_ = 0;
  std::uint64_t builds_ = 0;
  std::uint32_t engine_odr_mhz_ = 0;
  std::unique_ptr<ScenarioEngine> engine_;
  std::uint8_t control_ = 0;
  std::uint64_t transactions_ = 0;
};

}  // namespace vibedaq::bus
