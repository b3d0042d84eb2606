#include "vibedaq/analysis/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vibedaq::analysis {

namespace fs = std::filesystem;
using spectra::Spectrum;
using spectra::SpectrumError;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

double band_sum(const Spectrum& s, double lo, double hi) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.freqs_hz[i] >= lo && s.freqs_hz[i] <= hi) sum += s.values[i];
  }
  return sum * s.df();
}

Spectrum band_slice(const Spectrum& s, double lo, double hi, std::vector<std::size_t>* idx) {
  Spectrum out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.freqs_hz[i] < lo || s.freqs_hz[i] > hi) continue;
    out.freqs_hz.push_back(s.freqs_hz[i]);
    out.values.push_back(s.values[i]);
    if (idx) idx->push_back(i);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

RunResult analyze_run(const RunFile& run, const AnalysisParams& params) {
  RunResult r;
  r.run_id = run.run_id;
  r.test_type = run.test_type;
  r.source = run.source;
  if (run.channels.empty()) throw SpectrumError(run.source + ": no channels");

  std::vector<Spectrum> npsds;
  npsds.reserve(run.channels.size());
  for (const auto& ch : run.channels) {
    if (ch.values.size() < params.welch.nperseg) {
      throw SpectrumError(run.source + ": channel " + channel_label(ch.channel) + " has " +
                          std::to_string(ch.values.size()) + " samples, fewer than nperseg " +
                          std::to_string(params.welch.nperseg));
    }
    const auto x = spectra::remove_mean(ch.values);
    const auto psd = spectra::welch_psd(x, run.fs_hz, params.welch);
    ChannelResult c;
    c.channel = ch.channel;
    c.samples = ch.values.size();
    c.missing_fraction = ch.missing_fraction();
    c.flagged = c.missing_fraction > params.missing_flag_fraction;
    c.energy_g2 = psd.integral();
    c.band_energy_g2 = band_sum(psd, params.band_lo_hz, params.band_hi_hz);
    r.channels.push_back(c);
    npsds.push_back(spectra::npsd(psd));
  }
  r.anpsd = spectra::anpsd(npsds);
  return r;
}

Analysis analyze(std::span<const RunFile> runs, const AnalysisParams& params) {
  if (runs.empty()) throw SpectrumError("no runs to analyze");
  Analysis a;
  a.params = params;
  a.fs_hz = runs.front().fs_hz;
  a.test_type = runs.front().test_type;
  for (const auto& run : runs) {
    if (run.fs_hz != a.fs_hz) {
      throw SpectrumError(run.source + ": fs_hz " + num(run.fs_hz) + " differs from " + num(a.fs_hz));
    }
    if (run.test_type != a.test_type) {
      a.warnings.push_back(run.source + ": test type differs from the first run");
    }
    a.runs.push_back(analyze_run(run, params));
    for (const auto& c : a.runs.back().channels) {
      if (c.flagged) {
        a.warnings.push_back(run.source + ": channel " + channel_label(c.channel) + " missing " +
                             num(100.0 * c.missing_fraction) + "% of samples");
      }
    }
  }

  std::vector<Spectrum> per_run;
  for (const auto& r : a.runs) per_run.push_back(r.anpsd);
  if (per_run.size() >= 2) {
    auto ci = spectra::mean_ci(per_run, params.level);
    a.mean = std::move(ci.mean);
    a.ci_lower = std::move(ci.lower);
    a.ci_upper = std::move(ci.upper);
  } else {
    a.mean = per_run.front();
    a.warnings.push_back("single run: confidence interval undefined, ANPSD written without CI");
  }
  a.peaks = spectra::find_peaks(a.mean, params.peak_count, params.prominence_ratio);
  return a;
}

void write_analysis(const Analysis& a, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& p = a.params;
  const std::string meta = "# vibedaq-analysis v1,test_type=" + std::string(to_string(a.test_type)) +
                           ",runs=" + std::to_string(a.runs.size()) + ",fs_hz=" + num(a.fs_hz) +
                           ",nperseg=" + std::to_string(p.welch.nperseg) +
                           ",overlap=" + num(p.welch.overlap) + ",level=" + num(p.level);
  {
    auto out = open_out(dir / "anpsd.csv");
    out << meta << "\nfreq_hz,anpsd,ci_lower,ci_upper\n";
    for (std::size_t i = 0; i < a.mean.size(); ++i) {
      out << num(a.mean.freqs_hz[i]) << ',' << num(a.mean.values[i]) << ',';
      if (a.has_ci()) out << num(a.ci_lower[i]) << ',' << num(a.ci_upper[i]);
      else out << ',';
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "peaks.csv");
    out << "f_hz,value,prominence\n";
    for (const auto& pk : a.peaks) {
      out << num(pk.f_hz) << ',' << num(pk.value) << ',' << num(pk.prominence) << '\n';
    }
  }
  {
    auto out = open_out(dir / "channels.csv");
    out << "run_id,channel,samples,missing_fraction,flagged,energy_g2,band_energy_g2\n";
    for (const auto& r : a.runs) {
      for (const auto& c : r.channels) {
        out << r.run_id << ',' << channel_label(c.channel) << ',' << c.samples << ','
            << num(c.missing_fraction) << ',' << (c.flagged ? 1 : 0) << ',' << num(c.energy_g2)
            << ',' << num(c.band_energy_g2) << '\n';
      }
    }
  }
  for (std::size_t k = 0; k < a.runs.size(); ++k) {
    const auto& r = a.runs[k];
    // Run ids repeat across masters; the position keeps names unique.
    auto out = open_out(dir / ("run_" + std::to_string(k + 1) + "_anpsd.csv"));
    out << "# source=" << fs::path(r.source).filename().string() << ",run_id=" << r.run_id << '\n';
    out << "freq_hz,anpsd\n";
    for (std::size_t i = 0; i < r.anpsd.size(); ++i) {
      out << num(r.anpsd.freqs_hz[i]) << ',' << num(r.anpsd.values[i]) << '\n';
    }
  }
}

AnalysisFile read_analysis(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "anpsd.csv" : path;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  AnalysisFile af;
  af.source = file.string();
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(af.source + ":" + std::to_string(lineno) + ": " + what);
  };

  ++lineno;
  if (!std::getline(in, line) || line.rfind("# vibedaq-analysis v1", 0) != 0) {
    fail("expected '# vibedaq-analysis v1' header");
  }
  for (const auto& kv : split_csv(line.substr(2))) {
    if (auto eq = kv.find('='); eq != std::string::npos) af.metadata[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  ++lineno;
  if (!std::getline(in, line) || line != "freq_hz,anpsd,ci_lower,ci_upper") fail("bad column header");

  bool any_ci = false, any_empty = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_csv(line);
    if (f.size() != 4) fail("expected 4 fields");
    try {
      af.mean.freqs_hz.push_back(std::stod(f[0]));
      af.mean.values.push_back(std::stod(f[1]));
      if (f[2].empty() || f[3].empty()) {
        any_empty = true;
      } else {
        any_ci = true;
        af.ci_lower.push_back(std::stod(f[2]));
        af.ci_upper.push_back(std::stod(f[3]));
      }
    } catch (const std::logic_error&) {
      fail("bad number");
    }
  }
  if (any_ci && any_empty) fail("confidence bounds present on some rows only");
  return af;
}

Comparison compare(const AnalysisFile& tvt, const AnalysisFile& avt, double band_lo_hz,
                   double band_hi_hz, double prominence_ratio) {
  if (!tvt.mean.same_grid(avt.mean)) {
    throw SpectrumError("frequency grids differ (" + std::to_string(tvt.mean.size()) + " vs " +
                        std::to_string(avt.mean.size()) + " bins)");
  }
  Comparison c;
  c.band_lo_hz = band_lo_hz;
  c.band_hi_hz = band_hi_hz;

  auto side = [&](const AnalysisFile& af, Spectrum& norm, std::vector<double>& lo,
                  std::vector<double>& hi) {
    const auto full = spectra::peak_normalize(af.mean, band_lo_hz, band_hi_hz);
    std::vector<std::size_t> idx;
    norm = band_slice(full, band_lo_hz, band_hi_hz, &idx);
    if (!af.ci_lower.empty()) {
      double peak = 0.0;
      for (auto i : idx) peak = std::max(peak, af.mean.values[i]);
      const double scale = 1.0 / peak;
      for (auto i : idx) {
        lo.push_back(af.ci_lower[i] * scale);
        hi.push_back(af.ci_upper[i] * scale);
      }
    }
  };
  side(tvt, c.tvt_norm, c.tvt_ci_lo, c.tvt_ci_hi);
  side(avt, c.avt_norm, c.avt_ci_lo, c.avt_ci_hi);

  auto first_two = [&](const Spectrum& s) {
    auto peaks = spectra::find_peaks(s, 2, prominence_ratio);
    std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.f_hz < b.f_hz; });
    return peaks;
  };
  const auto tp = first_two(c.tvt_norm);
  const auto ap = first_two(c.avt_norm);
  const double df = tvt.mean.df();
  for (std::size_t i = 0; i < std::min(tp.size(), ap.size()); ++i) {
    PeakDelta d;
    d.rank = i + 1;
    d.tvt_f_hz = tp[i].f_hz;
    d.avt_f_hz = ap[i].f_hz;
    d.delta_hz = ap[i].f_hz - tp[i].f_hz;
    d.delta_bins = df > 0.0 ? std::round(d.delta_hz / df) : 0.0;
    c.deltas.push_back(d);
  }
  return c;
}

void write_comparison(const Comparison& c, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "comparison.csv");
    out << "freq_hz,tvt_norm,avt_norm,tvt_ci_lo,tvt_ci_hi,avt_ci_lo,avt_ci_hi\n";
    auto opt = [](const std::vector<double>& v, std::size_t i) { return v.empty() ? std::string() : num(v[i]); };
    for (std::size_t i = 0; i < c.tvt_norm.size(); ++i) {
      out << num(c.tvt_norm.freqs_hz[i]) << ',' << num(c.tvt_norm.values[i]) << ','
          << num(c.avt_norm.values[i]) << ',' << opt(c.tvt_ci_lo, i) << ',' << opt(c.tvt_ci_hi, i)
          << ',' << opt(c.avt_ci_lo, i) << ',' << opt(c.avt_ci_hi, i) << '\n';
    }
  }
  auto out = open_out(dir / "peak_deltas.csv");
  out << "rank,tvt_f_hz,avt_f_hz,delta_hz,delta_bins\n";
  for (const auto& d : c.deltas) {
    out << d.rank << ',' << num(d.tvt_f_hz) << ',' << num(d.avt_f_hz) << ',' << num(d.delta_hz)
        << ',' << num(d.delta_bins) << '\n';
  }
}

}  // namespace vibedaq::analysis
