#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vibedaq {

enum class TestType : std::uint8_t { TVT = 0, AVT = 1 };

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::X, Axis::Y, Axis::Z};

std::string_view to_string(TestType t);
std::optional<TestType> parse_test_type(std::string_view s);

char axis_char(Axis a);
std::optional<Axis> parse_axis(char c);

/// Output data rates the accelerometer supports, in milli-hertz.
inline constexpr std::array<std::uint32_t, 7> kSupportedOdrMilliHz{
    12'500, 26'000, 52'000, 104'000, 208'000, 416'000, 833'000};

inline constexpr std::array<int, 4> kSupportedRangesG{2, 4, 8, 16};

/// Run-wide acquisition settings broadcast by the master to every slave.
struct AcquisitionConfig {
  std::uint32_t run_id = 0;
  TestType test_type = TestType::TVT;
  double odr_hz = 208.0;
  int range_g = 2;
  std::uint32_t duration_s = 60;
  /// Master-epoch microseconds; 0 means start immediately.
  std::uint64_t scheduled_start_us = 0;

  friend bool operator==(const AcquisitionConfig&, const AcquisitionConfig&) = default;
};

/// Sampling rate rounded to the nearest milli-hertz (the wire representation).
std::uint32_t odr_millihertz(double odr_hz);

/// Returns every violated invariant; an empty list means the config is valid.
std::vector<std::string> validate_config(const AcquisitionConfig& cfg);

/// Number of deadline-grid ticks in a run: ceil(duration_s * odr_hz).
std::uint64_t ticks_per_run(const AcquisitionConfig& cfg);

/// Microseconds from the start of the run to tick k. Rounded up so that a
/// sensor sampling at exactly odr_hz has already produced sample k.
std::uint64_t tick_offset_us(std::uint64_t k, std::uint32_t odr_mhz);

/// Physical sensor: a multiplexer channel on a given slave.
struct SensorId {
  std::uint8_t slave_id = 1;
  std::uint8_t mux_channel = 0;

  friend auto operator<=>(const SensorId&, const SensorId&) = default;
};

/// Table-style sensor name, "<mux>_<slave>" (sensor 0 on slave 1 is "0_1").
std::string sensor_label(SensorId s);

struct ChannelId {
  std::uint8_t slave_id = 1;
  std::uint8_t mux_channel = 0;
  Axis axis = Axis::X;

  SensorId sensor() const { return {slave_id, mux_channel}; }

  friend auto operator<=>(const ChannelId&, const ChannelId&) = default;
};

/// "<mux>_<slave>_<axis>", e.g. mux 0 on slave 1, axis x is "0_1_x".
std::string channel_label(ChannelId ch);
std::optional<ChannelId> parse_channel_label(std::string_view label);
bool is_valid(ChannelId ch);

struct SampleRecord {
  std::uint32_t seq = 0;
  std::uint64_t t_local_us = 0;
  std::array<std::int16_t, 3> raw{};

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct SensorPosition {
  SensorId sensor;
  double x_cm = 0.0;
  double y_cm = 0.0;
};

/// Wing-spar layout used in the taxi and ambient tests (two slaves, three
/// sensors each).
std::vector<SensorPosition> wing_sensor_layout();

/// raw * range_g / 32768.
inline double raw_to_g(std::int16_t raw, int range_g) {
  return static_cast<double>(raw) * static_cast<double>(range_g) / 32768.0;
}

struct Quantized {
  std::int16_t raw = 0;
  bool saturated = false;
};

/// Inverse of raw_to_g with rounding to nearest and clipping to the
/// representable range.
Quantized g_to_raw(double g, int range_g);

}  // namespace vibedaq
