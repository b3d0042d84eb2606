#include <cstdio>
#include <iostream>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "vibedaq/analysis/pipeline.hpp"
#include "vibedaq/analysis/run_file.hpp"

namespace vibedaq::cli {

namespace {

void add_welch_options(CLI::App& app, analysis::AnalysisParams& p) {
  app.add_option("--nperseg", p.welch.nperseg, "Welch segment length")->capture_default_str();
  app.add_option("--overlap", p.welch.overlap, "Welch overlap fraction")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.95));
  app.add_option("--prominence", p.prominence_ratio, "Peak prominence threshold, multiples of the median")
      ->capture_default_str();
}

}  // namespace

Command add_analyze(CLI::App& app, const GlobalOptions& /*g*/) {
  struct Opts {
    std::vector<std::string> inputs;
    std::string out_dir = ".";
    analysis::AnalysisParams params;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("runs", o->inputs, "Run CSV files")->required()->check(CLI::ExistingFile);
  app.add_option("--out-dir", o->out_dir, "Directory for spectra CSVs")->capture_default_str();
  app.add_option("--level", o->params.level, "Confidence level")->capture_default_str()->check(CLI::Range(0.5, 0.999));
  app.add_option("--peaks", o->params.peak_count, "Number of dominant peaks")->capture_default_str();
  add_welch_options(app, o->params);

  return [o] {
    std::vector<analysis::RunFile> runs;
    runs.reserve(o->inputs.size());
    for (const auto& path : o->inputs) runs.push_back(analysis::read_run_file(path));
    const auto a = analysis::analyze(runs, o->params);
    for (const auto& w : a.warnings) spdlog::warn("{}", w);
    analysis::write_analysis(a, o->out_dir);

    std::cout << to_string(a.test_type) << ": " << a.runs.size() << " run(s), fs " << a.fs_hz << " Hz, df "
              << a.mean.df() << " Hz" << (a.has_ci() ? "" : ", no confidence interval") << "\n";
    for (const auto& p : a.peaks) std::printf("  peak %.4f Hz  anpsd %.6g\n", p.f_hz, p.value);
    std::cout << "  wrote " << o->out_dir << "/anpsd.csv\n";
    return kExitOk;
  };
}

Command add_compare(CLI::App& app, const GlobalOptions& /*g*/) {
  struct Opts {
    std::string tvt;
    std::string avt;
    std::string out_dir = ".";
    double band_lo = 0.0;
    double band_hi = 10.0;
    double prominence = analysis::kCompareProminenceRatio;
  };
  auto o = std::make_shared<Opts>();
  app.add_option("--tvt", o->tvt, "TVT analysis directory or anpsd.csv")->required()->check(CLI::ExistingPath);
  app.add_option("--avt", o->avt, "AVT analysis directory or anpsd.csv")->required()->check(CLI::ExistingPath);
  app.add_option("--band-lo", o->band_lo, "Band lower edge in Hz")->capture_default_str();
  app.add_option("--band-hi", o->band_hi, "Band upper edge in Hz")->capture_default_str();
  app.add_option("--prominence", o->prominence, "Peak prominence threshold, multiples of the median")
      ->capture_default_str();
  app.add_option("--out-dir", o->out_dir, "Directory for comparison CSVs")->capture_default_str();

  return [o] {
    if (!(o->band_hi > o->band_lo) || o->band_lo < 0) throw UsageError("band must satisfy 0 <= lo < hi");
    const auto tvt = analysis::read_analysis(o->tvt);
    const auto avt = analysis::read_analysis(o->avt);
    const auto c = analysis::compare(tvt, avt, o->band_lo, o->band_hi, o->prominence);
    analysis::write_comparison(c, o->out_dir);
    for (const auto& d : c.deltas) {
      std::printf("  peak %zu: TVT %.4f Hz, AVT %.4f Hz, delta %.4f Hz (%.2f bins)\n", d.rank, d.tvt_f_hz,
                  d.avt_f_hz, d.delta_hz, d.delta_bins);
    }
    std::cout << "  wrote " << o->out_dir << "/comparison.csv\n";
    return kExitOk;
  };
}

}  // namespace vibedaq::cli
