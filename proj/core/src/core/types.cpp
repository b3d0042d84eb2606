#include "vibedaq/core/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace vibedaq {

std::string_view to_string(TestType t) {
  return t == TestType::TVT ? "TVT" : "AVT";
}

std::optional<TestType> parse_test_type(std::string_view s) {
  if (s == "TVT" || s == "tvt") return TestType::TVT;
  if (s == "AVT" || s == "avt") return TestType::AVT;
  return std::nullopt;
}

char axis_char(Axis a) {
  switch (a) {
    case Axis::X: return 'x';
    case Axis::Y: return 'y';
    case Axis::Z: return 'z';
  }
  return '?';
}

std::optional<Axis> parse_axis(char c) {
  switch (c) {
    case 'x': return Axis::X;
    case 'y': return Axis::Y;
    case 'z': return Axis::Z;
    default: return std::nullopt;
  }
}

std::uint32_t odr_millihertz(double odr_hz) {
  if (!std::isfinite(odr_hz) || odr_hz <= 0.0 || odr_hz > 4.0e6) return 0;
  return static_cast<std::uint32_t>(std::llround(odr_hz * 1000.0));
}

std::vector<std::string> validate_config(const AcquisitionConfig& cfg) {
  std::vector<std::string> out;
  const double mhz = cfg.odr_hz * 1000.0;
  const bool odr_ok = std::any_of(kSupportedOdrMilliHz.begin(), kSupportedOdrMilliHz.end(),
                                  [&](std::uint32_t s) { return static_cast<double>(s) == mhz; });
  if (!odr_ok) out.emplace_back("odr_hz unsupported");
  if (std::find(kSupportedRangesG.begin(), kSupportedRangesG.end(), cfg.range_g) ==
      kSupportedRangesG.end()) {
    out.emplace_back("range_g unsupported");
  }
  if (cfg.duration_s < 1) out.emplace_back("duration_s must be >= 1");
  return out;
}

std::uint64_t ticks_per_run(const AcquisitionConfig& cfg) {
  const std::uint64_t mhz = odr_millihertz(cfg.odr_hz);
  return (static_cast<std::uint64_t>(cfg.duration_s) * mhz + 999) / 1000;
}

std::uint64_t tick_offset_us(std::uint64_t k, std::uint32_t odr_mhz) {
  // k * 1e9 / odr_mhz, rounded up. Split into whole seconds and remainder
  // so the product stays within 64 bits for any realistic k.
  const std::uint64_t whole = k / odr_mhz;
  const std::uint64_t rem = k % odr_mhz;
  return whole * 1'000'000'000u + (rem * 1'000'000'000u + odr_mhz - 1) / odr_mhz;
}

std::string sensor_label(SensorId s) {
  return std::to_string(s.mux_channel) + "_" + std::to_string(s.slave_id);
}

std::string channel_label(ChannelId ch) {
  std::string out = sensor_label(ch.sensor());
  out += '_';
  out += axis_char(ch.axis);
  return out;
}

bool is_valid(ChannelId ch) { return ch.slave_id >= 1 && ch.mux_channel <= 7; }

std::optional<ChannelId> parse_channel_label(std::string_view label) {
  const auto first = label.find('_');
  if (first == std::string_view::npos) return std::nullopt;
  const auto second = label.find('_', first + 1);
  if (second == std::string_view::npos || second + 2 != label.size()) return std::nullopt;

  auto parse_u8 = [](std::string_view s) -> std::optional<std::uint8_t> {
    unsigned v = 0;
    if (s.empty()) return std::nullopt;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v > 255) return std::nullopt;
    return static_cast<std::uint8_t>(v);
  };
  const auto mux = parse_u8(label.substr(0, first));
  const auto slave = parse_u8(label.substr(first + 1, second - first - 1));
  const auto axis = parse_axis(label.back());
  if (!mux || !slave || !axis) return std::nullopt;
  ChannelId ch{*slave, *mux, *axis};
  if (!is_valid(ch)) return std::nullopt;
  return ch;
}

std::vector<SensorPosition> wing_sensor_layout() {
  return {
      {{1, 0}, -8.6, 8.6},  {{1, 1}, -8.6, 52.6},  {{1, 2}, -8.6, 97.6},
      {{2, 0}, -8.6, -8.6}, {{2, 1}, -8.6, -39.2}, {{2, 2}, -8.6, -96.6},
  };
}

Quantized g_to_raw(double g, int range_g) {
  const double counts = std::nearbyint(g * 32768.0 / static_cast<double>(range_g));
  if (counts > 32767.0) return {32767, true};
  if (counts < -32768.0) return {-32768, true};
  return {static_cast<std::int16_t>(counts), false};
}

}  // namespace vibedaq
