#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vibedaq/analysis/run_file.hpp"
#include "vibedaq/spectra/spectra.hpp"

namespace vibedaq::analysis {

struct AnalysisParams {
  spectra::WelchParams welch;
  double level = 0.95;
  std::size_t peak_count = 5;
  /// Over the full spectrum the median sits on the noise floor.
  double prominence_ratio = 250.0;
  /// Channels missing more than this fraction of samples are flagged.
  double missing_flag_fraction = 0.01;
  double band_lo_hz = 0.0;
  double band_hi_hz = 10.0;
};

struct ChannelResult {
  ChannelId channel;
  std::uint64_t samples = 0;
  double missing_fraction = 0.0;
  bool flagged = false;
  /// Sum of PSD * df over all bins and over the comparison band.
  double energy_g2 = 0.0;
  double band_energy_g2 = 0.0;
};

struct RunResult {
  std::uint32_t run_id = 0;
  TestType test_type = TestType::TVT;
  std::string source;
  spectra::Spectrum anpsd;
  std::vector<ChannelResult> channels;
};

struct Analysis {
  AnalysisParams params;
  double fs_hz = 0.0;
  TestType test_type = TestType::TVT;
  std::vector<RunResult> runs;
  spectra::Spectrum mean;
  /// Empty with a single run.
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;
  std::vector<spectra::Peak> peaks;
  std::vector<std::string> warnings;

  bool has_ci() const { return !ci_lower.empty(); }
};

/// Per channel: mean removal, Welch PSD, NPSD; the run ANPSD averages all
/// channels.
RunResult analyze_run(const RunFile& run, const AnalysisParams& params);

/// Runs analyze_run on every file, then the mean ANPSD with a confidence
/// interval across runs (when there are at least two) and peak detection.
Analysis analyze(std::span<const RunFile> runs, const AnalysisParams& params);

/// Writes anpsd.csv, peaks.csv, channels.csv and run_<id>_anpsd.csv.
void write_analysis(const Analysis& a, const std::filesystem::path& dir);

/// anpsd.csv read back for comparison.
struct AnalysisFile {
  std::string source;
  std::map<std::string, std::string> metadata;
  spectra::Spectrum mean;
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;
};

/// Accepts an anpsd.csv file or a directory holding one.
AnalysisFile read_analysis(const std::filesystem::path& path);

struct PeakDelta {
  std::size_t rank = 0;
  double tvt_f_hz = 0.0;
  double avt_f_hz = 0.0;
  double delta_hz = 0.0;
  double delta_bins = 0.0;
};

struct Comparison {
  double band_lo_hz = 0.0;
  double band_hi_hz = 10.0;
  spectra::Spectrum tvt_norm;  // in-band bins only
  spectra::Spectrum avt_norm;
  std::vector<double> tvt_ci_lo, tvt_ci_hi, avt_ci_lo, avt_ci_hi;
  std::vector<PeakDelta> deltas;
};

/// In-band medians are far above the noise floor, hence the lower default.
inline constexpr double kCompareProminenceRatio = 3.0;

/// Peak-normalises both mean ANPSDs over the band and pairs their two
/// largest in-band peaks by frequency. Throws SpectrumError on grid mismatch.
Comparison compare(const AnalysisFile& tvt, const AnalysisFile& avt, double band_lo_hz,
                   double band_hi_hz, double prominence_ratio = kCompareProminenceRatio);

/// Writes comparison.csv and peak_deltas.csv.
void write_comparison(const Comparison& c, const std::filesystem::path& dir);

}  // namespace vibedaq::analysis
