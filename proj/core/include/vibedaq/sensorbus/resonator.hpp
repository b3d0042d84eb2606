#pragma once

namespace vibedaq::bus {

/// Second-order section coefficients, normalised so a0 == 1.
struct BiquadCoeffs {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct ResonatorState {
  double u1 = 0.0, u2 = 0.0;
  double y1 = 0.0, y2 = 0.0;
};

/// Bilinear-transform discretisation of the single-degree-of-freedom
/// resonator H(s) = wn^2 / (s^2 + 2 zeta wn s + wn^2), pre-warped at f_n.
/// Throws std::invalid_argument unless 0 < zeta < 1 and 0 < f_n < fs/2.
BiquadCoeffs design_resonator(double f_n_hz, double zeta, double fs_hz);

/// Advances the difference equation by one sample and returns y_k.
double resonator_step(ResonatorState& state, const BiquadCoeffs& c, double u_k);

class Resonator {
 public:
  Resonator(double f_n_hz, double zeta, double fs_hz)
      : coeffs_(design_resonator(f_n_hz, zeta, fs_hz)) {}

  double step(double u) { return resonator_step(state_, coeffs_, u); }
  void reset() { state_ = {}; }

  const BiquadCoeffs& coeffs() const { return coeffs_; }
  const ResonatorState& state() const { return state_; }

 private:
  BiquadCoeffs coeffs_;
  ResonatorState state_;
};

}  // namespace vibedaq::bus
