#include "vibedaq/sensorbus/resonator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vibedaq::bus {

BiquadCoeffs design_resonator(double f_n_hz, double zeta, double fs_hz) {
  if (!(zeta > 0.0 && zeta < 1.0)) {
    throw std::invalid_argument("resonator: damping ratio must lie in (0, 1)");
  }
  if (!(fs_hz > 0.0) || !(f_n_hz > 0.0) || !(f_n_hz < fs_hz / 2.0)) {
    throw std::invalid_argument("resonator: natural frequency must lie in (0, fs/2)");
  }

  const double wn = 2.0 * std::numbers::pi * f_n_hz;
  const double t = 1.0 / fs_hz;
  // Pre-warped bilinear substitution s = k (1 - z^-1) / (1 + z^-1).
  const double k = wn / std::tan(wn * t / 2.0);
  const double k2 = k * k;
  const double w2 = wn * wn;

  const double a0 = k2 + 2.0 * zeta * wn * k + w2;
  BiquadCoeffs c;
  c.b0 = w2 / a0;
  c.b1 = 2.0 * w2 / a0;
  c.b2 = w2 / a0;
  c.a1 = (2.0 * w2 - 2.0 * k2) / a0;
  c.a2 = (k2 - 2.0 * zeta * wn * k + w2) / a0;
  return c;
}

double resonator_step(ResonatorState& s, const BiquadCoeffs& c, double u) {
  const double y = c.b0 * u + c.b1 * s.u1 + c.b2 * s.u2 - c.a1 * s.y1 - c.a2 * s.y2;
  s.u2 = s.u1;
  s.u1 = u;
  s.y2 = s.y1;
  s.y1 = y;
  return y;
}

}  // namespace vibedaq::bus
