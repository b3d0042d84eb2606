#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vibedaq::spectra {

class SpectrumError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One-sided spectrum on bins 0 .. nperseg/2.
struct Spectrum {
  std::vector<double> freqs_hz;
  std::vector<double> values;

  double df() const { return freqs_hz.size() > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0; }
  std::size_t size() const { return values.size(); }
  /// Sum of value * df.
  double integral() const;
  bool same_grid(const Spectrum& other) const;
};

struct WelchParams {
  std::size_t nperseg = 2048;
  double overlap = 0.5;
};

std::vector<double> remove_mean(std::span<const double> x);

/// Symmetric Hamming window: 0.54 - 0.46 cos(2 pi k / (N - 1)).
std::vector<double> hamming(std::size_t n);

/// Segment count for a signal of length n: floor((n - nperseg) / step) + 1.
std::size_t welch_segments(std::size_t n, const WelchParams& p);

/// Welch PSD, one-sided density in units^2/Hz. Expects a zero-mean signal.
Spectrum welch_psd(std::span<const double> x, double fs, const WelchParams& p = {});

/// Divides by the bin sum so the result sums to one.
Spectrum npsd(const Spectrum& p);

/// Per-bin mean of normalised spectra on a common grid.
Spectrum anpsd(std::span<const Spectrum> npsds);

struct AnpsdResult {
  Spectrum mean;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
  std::size_t runs = 0;
};

/// Two-sided Student-t quantile t(p, dof).
double student_t_quantile(double p, double dof);

/// Per-bin mean with m +- t(1 - alpha/2, n - 1) s / sqrt(n) bounds across
/// runs. Needs at least two runs.
AnpsdResult mean_ci(std::span<const Spectrum> runs, double level = 0.95);

/// Scales so the maximum over [f_lo, f_hi] is one.
Spectrum peak_normalize(const Spectrum& s, double f_lo, double f_hi);

struct Peak {
  double f_hz = 0.0;
  double value = 0.0;
  double prominence = 0.0;
  std::size_t bin = 0;
};

/// Local maxima whose prominence is at least min_prominence_ratio times the
/// median value, largest first, at least three bins apart, at most k.
/// A flat-topped maximum is reported at its lowest-frequency bin.
std::vector<Peak> find_peaks(const Spectrum& s, std::size_t k, double min_prominence_ratio = 1.0);

}  // namespace vibedaq::spectra
