#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "vibedaq/analysis/pipeline.hpp"
#include "vibedaq/analysis/run_file.hpp"
#include "vibedaq/master/csv_writer.hpp"

using namespace vibedaq;
using namespace vibedaq::analysis;
namespace fs = std::filesystem;

namespace {

// A run file whose channels carry sines at `freqs` plus white noise.
std::string synth_run(std::uint32_t run_id, TestType tt, const std::vector<double>& freqs, double amp,
                      std::uint64_t seed, std::uint32_t duration_s = 30, std::uint32_t drop_every = 0) {
  AcquisitionConfig c;
  c.run_id = run_id;
  c.test_type = tt;
  c.duration_s = duration_s;
  master::RunDataset ds(c, {{1, 0}, {1, 1}});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.002);
  const auto n = static_cast<std::uint32_t>(ticks_per_run(c));
  for (std::uint8_t mux = 0; mux < 2; ++mux) {
    proto::DataBatch b{1, mux, 0, {}};
    for (std::uint32_t k = 0; k < n; ++k) {
      if (drop_every && k % drop_every == 0) continue;
      double v = noise(rng);
      for (double f : freqs) v += amp * std::sin(2 * std::numbers::pi * f * k / 208.0 + f);
      const auto q = g_to_raw(v, 2).raw;
      b.records.clear();
      b.seq_first = k;
      b.records.push_back({k * 4808ull, q, static_cast<std::int16_t>(q / 2), static_cast<std::int16_t>(16384 + q)});
      ds.ingest(b, {});
    }
  }
  ds.set_expected(1, n);
  std::ostringstream out;
  master::render_csv({c, 1'735'689'600'000'000, seed}, ds, out);
  return out.str();
}

RunFile parse(const std::string& text, const std::string& name = "mem") {
  std::istringstream in(text);
  return parse_run_file(in, name);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const RunFileError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(RunFile, ParsesWhatTheWriterEmits) {
  const auto rf = parse(synth_run(3, TestType::AVT, {4.0}, 0.1, 1, 10));
  EXPECT_EQ(rf.run_id, 3u);
  EXPECT_EQ(rf.test_type, TestType::AVT);
  EXPECT_EQ(rf.fs_hz, 208.0);
  EXPECT_EQ(rf.range_g, 2);
  EXPECT_EQ(rf.rows, 2080u);
  ASSERT_EQ(rf.channels.size(), 6u);
  EXPECT_EQ(channel_label(rf.channels[4].channel), "1_1_y");
  for (const auto& ch : rf.channels) {
    EXPECT_EQ(ch.values.size(), 2080u);
    EXPECT_EQ(ch.missing, 0u);
  }
  EXPECT_EQ(rf.metadata.at("seed"), "1");
}

TEST(RunFile, MissingSamplesAreDroppedAndCounted) {
  const auto rf = parse(synth_run(1, TestType::TVT, {4.0}, 0.1, 1, 10, 50));
  for (const auto& ch : rf.channels) {
    EXPECT_EQ(ch.missing, 42u);  // k = 0, 50, ..., 2050
    EXPECT_EQ(ch.values.size(), 2080u - 42u);
    EXPECT_NEAR(ch.missing_fraction(), 42.0 / 2080.0, 1e-12);
  }
}

TEST(RunFile, ErrorsReportLine) {
  const std::string head = "# vibedaq-run v1\n# run_id=1,test_type=TVT,fs_hz=208,range_g=2,start_utc=x\n";
  EXPECT_EQ(error_line("garbage\n"), 1u);
  EXPECT_EQ(error_line("# vibedaq-run v1\n# run_id=1,test_type=TVT\n"), 2u);
  EXPECT_EQ(error_line(head + "seq,t_0_1_us,0_1_x_g\n"), 3u);
  EXPECT_EQ(error_line(head + "seq,t_0_1_us,0_1_x_g,0_1_y_g,0_1_z_g\n0,1,0,0,1\n2,2,0,0,1\n"), 5u);
  EXPECT_EQ(error_line(head + "seq,t_0_1_us,0_1_x_g,0_1_y_g,0_1_z_g\n0,1,0,,1\n"), 4u);
  EXPECT_EQ(error_line(head + "seq,t_0_1_us,0_1_x_g,0_1_y_g,0_1_z_g\n0,1,0,abc,1\n"), 4u);
  EXPECT_EQ(error_line(head + "seq,t_0_1_us,0_1_x_g,0_1_y_g,0_1_z_g\n0,1,0,0\n"), 4u);
  EXPECT_THROW(read_run_file("/nonexistent/run.csv"), RunFileError);
}

TEST(Pipeline, FindsInjectedToneAndRemovesGravity) {
  const auto rf = parse(synth_run(1, TestType::TVT, {6.0}, 0.2, 2));
  AnalysisParams p;
  p.prominence_ratio = 10.0;
  const auto r = analyze_run(rf, p);
  double total = 0.0;
  for (double v : r.anpsd.values) total += v;
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_LT(r.anpsd.values[0], 1e-6);  // the +1 g on z is gone
  const auto a = analyze(std::vector{rf}, p);
  ASSERT_FALSE(a.peaks.empty());
  EXPECT_NEAR(a.peaks[0].f_hz, 6.0, 208.0 / 2048);
  EXPECT_FALSE(a.has_ci());
  EXPECT_FALSE(a.warnings.empty());
}

TEST(Pipeline, CiAcrossRunsAndFlagging) {
  std::vector<RunFile> runs;
  for (std::uint64_t s = 1; s <= 3; ++s) runs.push_back(parse(synth_run(s, TestType::TVT, {3.0, 8.0}, 0.1, s, 30, s == 3 ? 20 : 0)));
  AnalysisParams p;
  p.prominence_ratio = 10.0;
  const auto a = analyze(runs, p);
  ASSERT_TRUE(a.has_ci());
  for (std::size_t k = 0; k < a.mean.size(); ++k) {
    ASSERT_LE(a.ci_lower[k], a.mean.values[k]);
    ASSERT_LE(a.mean.values[k], a.ci_upper[k]);
  }
  ASSERT_GE(a.peaks.size(), 2u);
  std::vector<double> f{a.peaks[0].f_hz, a.peaks[1].f_hz};
  std::sort(f.begin(), f.end());
  EXPECT_NEAR(f[0], 3.0, 0.11);
  EXPECT_NEAR(f[1], 8.0, 0.11);
  int flagged = 0;
  for (const auto& r : a.runs) {
    for (const auto& c : r.channels) flagged += c.flagged;
  }
  EXPECT_EQ(flagged, 6);  // 5% missing in every channel of run 3
}

TEST(Pipeline, WriteReadAndCompare) {
  const auto dir = fs::temp_directory_path() / "vibedaq_analysis_test";
  fs::remove_all(dir);
  AnalysisParams p;
  p.prominence_ratio = 10.0;
  std::vector<RunFile> tvt, avt;
  for (std::uint64_t s = 1; s <= 2; ++s) {
    tvt.push_back(parse(synth_run(s, TestType::TVT, {3.2, 7.5, 20.0}, 0.2, s)));
    avt.push_back(parse(synth_run(10 + s, TestType::AVT, {3.2, 7.5, 20.0}, 0.01, 10 + s)));
  }
  write_analysis(analyze(tvt, p), dir / "tvt");
  write_analysis(analyze(avt, p), dir / "avt");
  for (const char* f : {"anpsd.csv", "peaks.csv", "channels.csv", "run_1_anpsd.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "tvt" / f)) << f;
  }
  const auto t = read_analysis(dir / "tvt");
  const auto v = read_analysis(dir / "avt" / "anpsd.csv");
  EXPECT_EQ(t.mean.size(), 1025u);
  EXPECT_EQ(t.ci_lower.size(), 1025u);

  const auto c = compare(t, v, 0.0, 10.0);
  double mx = 0.0;
  for (double x : c.tvt_norm.values) mx = std::max(mx, x);
  EXPECT_EQ(mx, 1.0);
  EXPECT_LE(c.tvt_norm.freqs_hz.back(), 10.0);
  ASSERT_EQ(c.deltas.size(), 2u);
  for (const auto& d : c.deltas) EXPECT_LE(std::abs(d.delta_bins), 1.0);
  write_comparison(c, dir / "cmp");
  EXPECT_TRUE(fs::exists(dir / "cmp" / "comparison.csv"));
  EXPECT_TRUE(fs::exists(dir / "cmp" / "peak_deltas.csv"));
  fs::remove_all(dir);
}
