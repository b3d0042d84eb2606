#include <gtest/gtest.h>

#include <cmath>

#include "vibedaq/sensorbus/bus.hpp"
#include "vibedaq/sensorbus/scenario.hpp"

using namespace vibedaq;
using namespace vibedaq::bus;

namespace {

double variance_of_output(const ModalScenario& s, std::uint64_t seed) {
  ScenarioEngine e(s, 208.0, {0, 1, 2}, seed);
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (int k = 0; k < 208 * 120; ++k) {
    e.advance();
    if (k < 2000) continue;
    for (std::size_t i = 0; i < e.sensor_count(); ++i) {
      for (int a = 0; a < 3; ++a) {
        const double v = e.sample_g(i)[a] - (a == 2 ? s.gravity_g : 0.0);
        sum += v;
        sum2 += v * v;
        ++n;
      }
    }
  }
  const double m = sum / n;
  return sum2 / n - m * m;
}

}  // namespace

TEST(Presets, TaxiHasFiveModesTwoBelowTenHertz) {
  const auto s = tvt_preset();
  ASSERT_EQ(s.modes.size(), 5u);
  int below = 0;
  for (const auto& m : s.modes) below += m.f_hz < 10.0;
  EXPECT_EQ(below, 2);
  const double f[] = {3.2, 7.5, 16.0, 24.0, 31.0};
  const double z[] = {0.02, 0.025, 0.03, 0.04, 0.05};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(s.modes[i].f_hz, f[i]);
    EXPECT_DOUBLE_EQ(s.modes[i].zeta, z[i]);
  }
  EXPECT_DOUBLE_EQ(s.excitation_rms_g, 0.2);
  EXPECT_DOUBLE_EQ(s.noise_floor_rms_g, 0.002);
  EXPECT_DOUBLE_EQ(avt_preset().excitation_rms_g, 0.005);
}

TEST(Presets, ModesSatisfyInvariants) {
  for (const auto& s : {tvt_preset(), avt_preset()}) {
    EXPECT_NO_THROW(validate_scenario(s, 208.0));
    for (const auto& m : s.modes) {
      EXPECT_GT(m.zeta, 0.0);
      EXPECT_LT(m.zeta, 1.0);
      EXPECT_LT(m.f_hz, 104.0);
    }
  }
  EXPECT_THROW(validate_scenario(tvt_preset(), 52.0), std::invalid_argument);
}

TEST(Engine, GravityOnlyWhenEverythingElseIsZero) {
  ModalScenario s = tvt_preset();
  for (auto& m : s.modes) m.gain = 0.0;
  s.noise_floor_rms_g = 0.0;
  VirtualBus b(s, {0}, 1);
  b.mux_select(1);
  b.write_register(kImuAddress, reg::CTRL1_XL, *ctrl1_xl_code(208'000, 2));
  for (int k = 0; k < 100; ++k) {
    b.sync(0);
    const auto raw = b.device(0)->output_raw();
    EXPECT_EQ(raw[0], 0);
    EXPECT_EQ(raw[1], 0);
    EXPECT_EQ(raw[2], g_to_raw(1.0, 2).raw);
  }
}

TEST(Engine, AmbientCarriesLessEnergyThanTaxi) {
  EXPECT_LT(variance_of_output(avt_preset(), 5), variance_of_output(tvt_preset(), 5));
}

TEST(Engine, EqualGainSensorsAreCoherent) {
  ModalScenario s = tvt_preset();
  s.noise_floor_rms_g = 0.0;
  ScenarioEngine e(s, 208.0, {0, 3}, 9);
  for (int k = 0; k < 5000; ++k) {
    e.advance();
    ASSERT_EQ(e.sample_g(0), e.sample_g(1)) << k;
  }
}

TEST(Engine, SensorGainScalesOnlyTheModalPart) {
  ModalScenario s = tvt_preset();
  s.noise_floor_rms_g = 0.0;
  s.sensor_gain[1] = 0.5;
  ScenarioEngine e(s, 208.0, {0, 1}, 9);
  for (int k = 0; k < 1000; ++k) {
    e.advance();
    EXPECT_NEAR(e.sample_g(1)[0], 0.5 * e.sample_g(0)[0], 1e-12);
    EXPECT_NEAR(e.sample_g(1)[2] - 1.0, 0.5 * (e.sample_g(0)[2] - 1.0), 1e-12);
  }
}

TEST(Engine, SameSeedSameOutput) {
  ScenarioEngine a(tvt_preset(), 208.0, {0, 1, 2}, 77);
  ScenarioEngine b(tvt_preset(), 208.0, {0, 1, 2}, 77);
  ScenarioEngine c(tvt_preset(), 208.0, {0, 1, 2}, 78);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    a.advance();
    b.advance();
    c.advance();
    ASSERT_EQ(a.sample_g(2), b.sample_g(2));
    differs |= a.sample_g(2) != c.sample_g(2);
  }
  EXPECT_TRUE(differs);
}

TEST(Engine, BusDropsModesAboveNyquist) {
  VirtualBus b(tvt_preset(), {0}, 3);
  b.mux_select(1);
  b.write_register(kImuAddress, reg::CTRL1_XL, *ctrl1_xl_code(52'000, 2));
  ASSERT_NE(b.engine(), nullptr);
  EXPECT_EQ(b.engine()->scenario().modes.size(), 4u);  // 31 Hz is above 26
}

TEST(Parse, PresetThenOverrides) {
  const auto s = parse_scenario(
      "# ambient with two modes\n"
      "preset = avt\n"
      "excitation_rms = 0.01\n"
      "noise_floor_rms=0.001  # quieter\n"
      "mode = 2.0, 0.03, 1.0\n"
      "mode = 9.0, 0.04, 0.5\n"
      "axis_gain = 0.1,0.2,0.3\n"
      "sensor_gain = 2, 0.75\n"
      "gravity_g = 0.98\n");
  EXPECT_DOUBLE_EQ(s.excitation_rms_g, 0.01);
  EXPECT_DOUBLE_EQ(s.noise_floor_rms_g, 0.001);
  ASSERT_EQ(s.modes.size(), 2u);
  EXPECT_DOUBLE_EQ(s.modes[1].f_hz, 9.0);
  EXPECT_DOUBLE_EQ(s.modes[1].gain, 0.5);
  EXPECT_DOUBLE_EQ(s.axis_gain[2], 0.3);
  EXPECT_DOUBLE_EQ(s.gain_for(2), 0.75);
  EXPECT_DOUBLE_EQ(s.gain_for(0), 1.0);
  EXPECT_DOUBLE_EQ(s.gravity_g, 0.98);
}

TEST(Parse, EmptyTextIsTaxiPreset) {
  const auto s = parse_scenario("");
  EXPECT_EQ(s.modes.size(), 5u);
  EXPECT_DOUBLE_EQ(s.excitation_rms_g, 0.2);
}

TEST(Parse, ErrorsCarryLineNumbers) {
  const struct {
    const char* text;
    std::size_t line;
  } cases[] = {
      {"mode=1,2\n", 1},
      {"\n\nbogus=1\n", 3},
      {"excitation_rms=abc\n", 1},
      {"preset=xyz\n", 1},
      {"# c\nno equals sign\n", 2},
      {"sensor_gain=9,1\n", 1},
      {"axis_gain=1,2\n", 1},
  };
  for (const auto& c : cases) {
    try {
      parse_scenario(c.text);
      ADD_FAILURE() << c.text;
    } catch (const ScenarioParseError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text;
    }
  }
}
