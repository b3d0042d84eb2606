#include "vibedaq/sensorbus/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vibedaq::bus {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<double> parse_numbers(std::string_view value, std::size_t line) {
  std::vector<double> out;
  while (true) {
    const auto comma = value.find(',');
    const auto field = trim(value.substr(0, comma));
    double v = 0.0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || p != field.data() + field.size() ||
        !std::isfinite(v)) {
      throw ScenarioParseError(line, "bad number '" + std::string(field) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

double single(std::string_view value, std::size_t line) {
  auto v = parse_numbers(value, line);
  if (v.size() != 1) throw ScenarioParseError(line, "expected one value");
  return v.front();
}

}  // namespace

void validate_scenario(const ModalScenario& s, double odr_hz) {
  for (const auto& m : s.modes) {
    if (!(m.zeta > 0.0 && m.zeta < 1.0)) {
      throw std::invalid_argument("scenario: mode damping must lie in (0, 1)");
    }
    if (!(m.f_hz > 0.0 && m.f_hz < odr_hz / 2.0)) {
      throw std::invalid_argument("scenario: mode frequency " + std::to_string(m.f_hz) +
                                  " Hz is not below odr/2");
    }
    if (!std::isfinite(m.gain)) throw std::invalid_argument("scenario: non-finite gain");
  }
  if (!(s.excitation_rms_g >= 0.0) || !(s.noise_floor_rms_g >= 0.0)) {
    throw std::invalid_argument("scenario: RMS levels must be non-negative");
  }
}

ModalScenario tvt_preset() {
  ModalScenario s;
  s.modes = {
      {3.2, 0.02, 0.30}, {7.5, 0.025, 0.24}, {16.0, 0.03, 0.20},
      {24.0, 0.04, 0.24}, {31.0, 0.05, 0.28},
  };
  s.excitation_rms_g = 0.2;
  s.noise_floor_rms_g = 0.002;
  return s;
}

ModalScenario avt_preset() {
  ModalScenario s = tvt_preset();
  s.excitation_rms_g = 0.005;
  return s;
}

ModalScenario preset_for(TestType t) { return t == TestType::TVT ? tvt_preset() : avt_preset(); }

ModalScenario parse_scenario(std::string_view text) {
  ModalScenario s = tvt_preset();
  bool modes_replaced = false;
  std::size_t line_no = 0;

  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ScenarioParseError(line_no, "expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    if (key == "preset") {
      const auto t = parse_test_type(value);
      if (!t) throw ScenarioParseError(line_no, "unknown preset '" + std::string(value) + "'");
      s = preset_for(*t);
      modes_replaced = false;
    } else if (key == "excitation_rms") {
      s.excitation_rms_g = single(value, line_no);
    } else if (key == "noise_floor_rms") {
      s.noise_floor_rms_g = single(value, line_no);
    } else if (key == "gravity_g") {
      s.gravity_g = single(value, line_no);
    } else if (key == "axis_gain") {
      const auto v = parse_numbers(value, line_no);
      if (v.size() != 3) throw ScenarioParseError(line_no, "axis_gain needs x,y,z");
      s.axis_gain = {v[0], v[1], v[2]};
    } else if (key == "mode") {
      const auto v = parse_numbers(value, line_no);
      if (v.size() != 3) throw ScenarioParseError(line_no, "mode needs f_hz,zeta,gain");
      if (!modes_replaced) {
        s.modes.clear();
        modes_replaced = true;
      }
      s.modes.push_back({v[0], v[1], v[2]});
    } else if (key == "sensor_gain") {
      const auto v = parse_numbers(value, line_no);
      if (v.size() != 2 || v[0] < 0 || v[0] > 7 || v[0] != std::floor(v[0])) {
        throw ScenarioParseError(line_no, "sensor_gain needs <mux 0-7>,<factor>");
      }
      s.sensor_gain[static_cast<std::uint8_t>(v[0])] = v[1];
    } else {
      throw ScenarioParseError(line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  return s;
}

ModalScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

ScenarioEngine::ScenarioEngine(ModalScenario scenario, double odr_hz,
                               std::vector<std::uint8_t> mux_channels, std::uint64_t seed)
    : scenario_(std::move(scenario)), mux_(std::move(mux_channels)), rng_(seed) {
  validate_scenario(scenario_, odr_hz);
  resonators_.reserve(scenario_.modes.size());
  for (const auto& m : scenario_.modes) resonators_.emplace_back(m.f_hz, m.zeta, odr_hz);
  modal_.assign(scenario_.modes.size(), 0.0);
  outputs_.assign(mux_.size(), {0.0, 0.0, scenario_.gravity_g});
}

void ScenarioEngine::advance() {
  // Uncorrelated modal forcing: one draw per mode, shared by every sensor.
  double structural = 0.0;
  for (std::size_t m = 0; m < resonators_.size(); ++m) {
    modal_[m] = resonators_[m].step(scenario_.excitation_rms_g * unit_(rng_));
    structural += scenario_.modes[m].gain * modal_[m];
  }
  for (std::size_t i = 0; i < mux_.size(); ++i) {
    const double local = structural * scenario_.gain_for(mux_[i]);
    for (std::size_t a = 0; a < 3; ++a) {
      double v = local * scenario_.axis_gain[a] + scenario_.noise_floor_rms_g * unit_(rng_);
      if (a == 2) v += scenario_.gravity_g;
      outputs_[i][a] = v;
    }
  }
  ++tick_;
}

}  // namespace vibedaq::bus
