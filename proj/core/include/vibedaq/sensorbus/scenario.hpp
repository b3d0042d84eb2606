#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vibedaq/core/types.hpp"
#include "vibedaq/sensorbus/resonator.hpp"

namespace vibedaq::bus {

struct Mode {
  double f_hz = 0.0;
  double zeta = 0.02;
  /// g of response per g of excitation at DC.
  double gain = 1.0;
};

/// Structural vibration scenario: a set of lightly damped modes, each driven
/// by its own white excitation, plus an independent noise floor per axis.
struct ModalScenario {
  std::vector<Mode> modes;
  double excitation_rms_g = 0.0;
  double noise_floor_rms_g = 0.0;
  double gravity_g = 1.0;
  std::array<double, 3> axis_gain{0.35, 0.25, 1.0};
  /// Optional per-mux-channel scale applied to the modal response.
  std::map<std::uint8_t, double> sensor_gain;

  double gain_for(std::uint8_t mux) const {
    auto it = sensor_gain.find(mux);
    return it == sensor_gain.end() ? 1.0 : it->second;
  }
};

/// Throws std::invalid_argument describing the first violated invariant.
void validate_scenario(const ModalScenario& s, double odr_hz);

/// Five modes (3.2, 7.5, 16, 24, 31 Hz), broadband excitation of 0.2 g RMS.
ModalScenario tvt_preset();
/// Same modes as the taxi preset under 0.005 g RMS ambient excitation.
ModalScenario avt_preset();
ModalScenario preset_for(TestType t);

class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(std::size_t line, const std::string& what)
      : std::runtime_error("scenario line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses the key=value scenario format documented in docs/scenario.md.
ModalScenario parse_scenario(std::string_view text);
ModalScenario load_scenario(const std::filesystem::path& path);

/// Generates per-sensor acceleration in g, one tick at a time. Every sensor
/// on the bus sees the same modal excitation samples at a given tick.
class ScenarioEngine {
 public:
  ScenarioEngine(ModalScenario scenario, double odr_hz, std::vector<std::uint8_t> mux_channels,
                 std::uint64_t seed);

  /// Draws the next excitation sample per mode and updates every sensor's output.
  void advance();

  std::uint64_t tick() const { return tick_; }
  std::size_t sensor_count() const { return mux_.size(); }
  const std::vector<std::uint8_t>& mux_channels() const { return mux_; }

  /// Output of the sensor at `index` (into mux_channels()) for the current tick.
  const std::array<double, 3>& sample_g(std::size_t index) const { return outputs_.at(index); }
  /// Modal response of mode m at the current tick, before gains.
  double modal_response(std::size_t m) const { return modal_.at(m); }

  const ModalScenario& scenario() const { return scenario_; }

 private:
  ModalScenario scenario_;
  std::vector<std::uint8_t> mux_;
  std::vector<Resonator> resonators_;
  std::vector<double> modal_;
  std::vector<std::array<double, 3>> outputs_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> unit_{0.0, 1.0};
  std::uint64_t tick_ = 0;
};

}  // namespace vibedaq::bus
