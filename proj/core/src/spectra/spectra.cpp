#include "vibedaq/spectra/spectra.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

namespace vibedaq::spectra {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

/// Plans are created once per length. Planning is not thread-safe in FFTW,
/// execution on fresh aligned buffers is.
fftw_plan r2c_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mu);
  if (auto it = plans.find(n); it != plans.end()) return it->second;
  FftwBuffer<double> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  FftwBuffer<fftw_complex> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  plans.emplace(n, p);
  return p;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

double Spectrum::integral() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * df();
}

bool Spectrum::same_grid(const Spectrum& other) const {
  if (freqs_hz.size() != other.freqs_hz.size()) return false;
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    if (std::abs(freqs_hz[i] - other.freqs_hz[i]) > 1e-9 * std::max(1.0, std::abs(freqs_hz[i]))) {
      return false;
    }
  }
  return true;
}

std::vector<double> remove_mean(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) return out;
  const double m = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  for (auto& v : out) v -= m;
  return out;
}

std::vector<double> hamming(std::size_t n) {
  if (n < 2) throw SpectrumError("hamming window needs N >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom);
  }
  return w;
}

std::size_t welch_segments(std::size_t n, const WelchParams& p) {
  if (n < p.nperseg || p.nperseg == 0) return 0;
  const auto noverlap = static_cast<std::size_t>(std::floor(static_cast<double>(p.nperseg) * p.overlap));
  const std::size_t step = p.nperseg - noverlap;
  return (n - p.nperseg) / step + 1;
}

Spectrum welch_psd(std::span<const double> x, double fs, const WelchParams& p) {
  if (p.nperseg < 2 || p.nperseg % 2) throw SpectrumError("nperseg must be even and >= 2");
  if (!(p.overlap >= 0.0 && p.overlap < 1.0)) throw SpectrumError("overlap must be in [0, 1)");
  if (!(fs > 0.0)) throw SpectrumError("sampling rate must be positive");
  if (x.size() < p.nperseg) throw SpectrumError("signal shorter than nperseg");

  const std::size_t n = p.nperseg;
  const std::size_t bins = n / 2 + 1;
  const auto w = hamming(n);
  const double wss = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
  const std::size_t segs = welch_segments(x.size(), p);
  const std::size_t step =
      n - static_cast<std::size_t>(std::floor(static_cast<double>(n) * p.overlap));

  fftw_plan plan = r2c_plan(n);
  FftwBuffer<double> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  FftwBuffer<fftw_complex> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));

  std::vector<double> acc(bins, 0.0);
  for (std::size_t s = 0; s < segs; ++s) {
    const double* seg = x.data() + s * step;
    for (std::size_t i = 0; i < n; ++i) in[i] = seg[i] * w[i];
    fftw_execute_dft_r2c(plan, in.get(), out.get());
    for (std::size_t k = 0; k < bins; ++k) acc[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }

  Spectrum sp;
  sp.freqs_hz.resize(bins);
  sp.values.resize(bins);
  const double scale = 1.0 / (fs * wss * static_cast<double>(segs));
  for (std::size_t k = 0; k < bins; ++k) {
    sp.freqs_hz[k] = static_cast<double>(k) * fs / static_cast<double>(n);
    const double one_sided = (k == 0 || k == bins - 1) ? 1.0 : 2.0;
    sp.values[k] = acc[k] * scale * one_sided;
  }
  return sp;
}

Spectrum npsd(const Spectrum& p) {
  const double sum = std::accumulate(p.values.begin(), p.values.end(), 0.0);
  if (!(sum > 0.0)) throw SpectrumError("cannot normalise an all-zero spectrum");
  Spectrum out = p;
  for (auto& v : out.values) v /= sum;
  return out;
}

Spectrum anpsd(std::span<const Spectrum> npsds) {
  if (npsds.empty()) throw SpectrumError("anpsd needs at least one spectrum");
  Spectrum out;
  out.freqs_hz = npsds.front().freqs_hz;
  out.values.assign(out.freqs_hz.size(), 0.0);
  for (const auto& s : npsds) {
    if (!s.same_grid(npsds.front()) || s.values.size() != out.values.size()) {
      throw SpectrumError("frequency grids differ");
    }
    for (std::size_t i = 0; i < s.values.size(); ++i) out.values[i] += s.values[i];
  }
  const double n = static_cast<double>(npsds.size());
  for (auto& v : out.values) v /= n;
  return out;
}

double student_t_quantile(double p, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

AnpsdResult mean_ci(std::span<const Spectrum> runs, double level) {
  if (runs.size() < 2) throw SpectrumError("insufficient runs");
  if (!(level > 0.0 && level < 1.0)) throw SpectrumError("confidence level must be in (0, 1)");

  AnpsdResult r;
  r.mean = anpsd(runs);
  r.level = level;
  r.runs = runs.size();
  const double n = static_cast<double>(runs.size());
  const double t = student_t_quantile(1.0 - (1.0 - level) / 2.0, n - 1.0);
  const std::size_t bins = r.mean.values.size();
  r.lower.resize(bins);
  r.upper.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double m = r.mean.values[i];
    double ss = 0.0;
    for (const auto& s : runs) ss += (s.values[i] - m) * (s.values[i] - m);
    const double half = t * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    r.lower[i] = m - half;
    r.upper[i] = m + half;
  }
  return r;
}

Spectrum peak_normalize(const Spectrum& s, double f_lo, double f_hi) {
  double peak = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (s.freqs_hz[i] < f_lo || s.freqs_hz[i] > f_hi) continue;
    any = true;
    peak = std::max(peak, s.values[i]);
  }
  if (!any) throw SpectrumError("band does not intersect the frequency grid");
  if (!(peak > 0.0)) throw SpectrumError("zero maximum in band");
  Spectrum out = s;
  for (auto& v : out.values) v /= peak;
  return out;
}

std::vector<Peak> find_peaks(const Spectrum& s, std::size_t k, double min_prominence_ratio) {
  const auto& v = s.values;
  const std::size_t n = v.size();
  std::vector<Peak> candidates;
  if (k == 0 || n < 3) return {};

  for (std::size_t i = 1; i + 1 < n;) {
    if (!(v[i] > v[i - 1])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && v[j + 1] == v[i]) ++j;
    if (j + 1 < n && v[j + 1] < v[i]) {
      // Prominence: lowest point on each side before reaching higher ground.
      double left_min = v[i];
      for (std::size_t l = i; l-- > 0;) {
        if (v[l] > v[i]) break;
        left_min = std::min(left_min, v[l]);
      }
      double right_min = v[i];
      for (std::size_t r = j + 1; r < n; ++r) {
        if (v[r] > v[i]) break;
        right_min = std::min(right_min, v[r]);
      }
      candidates.push_back({s.freqs_hz[i], v[i], v[i] - std::max(left_min, right_min), i});
    }
    i = j + 1;
  }

  const double threshold = min_prominence_ratio * median_of(v);
  std::erase_if(candidates, [&](const Peak& p) { return p.prominence < threshold; });
  std::stable_sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.bin < b.bin;
  });

  std::vector<Peak> out;
  for (const auto& c : candidates) {
    const bool clear = std::all_of(out.begin(), out.end(), [&](const Peak& p) {
      return (c.bin > p.bin ? c.bin - p.bin : p.bin - c.bin) >= 3;
    });
    if (clear) out.push_back(c);
    if (out.size() == k) break;
  }
  return out;
}

}  // namespace vibedaq::spectra
