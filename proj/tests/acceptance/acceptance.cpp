// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Simulations and analyses go through the vibedaq CLI when
// --vibedaq is given, otherwise through the library directly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "message_gen.hpp"
#include "oracles.hpp"
#include "vibedaq/analysis/pipeline.hpp"
#include "vibedaq/analysis/run_file.hpp"
#include "vibedaq/protocol/frame.hpp"
#include "vibedaq/sensorbus/scenario.hpp"
#include "vibedaq/sim/artifacts.hpp"
#include "vibedaq/sim/simulation.hpp"
#include "vibedaq/spectra/spectra.hpp"

namespace fs = std::filesystem;
using namespace vibedaq;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome outcome() const {
    return {pass_, pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " [" + notes_ + "]")};
  }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------
// Simulation and analysis drivers

class Runner {
 public:
  Runner(fs::path work, std::string cli) : work_(std::move(work)), cli_(std::move(cli)) {}

  bool uses_cli() const { return !cli_.empty(); }
  const fs::path& work() const { return work_; }

  /// Returns the run CSV written into `dir`.
  fs::path simulate(const fs::path& dir, std::uint64_t seed, TestType tt, std::uint32_t duration_s) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    if (uses_cli()) {
      run({"--seed", std::to_string(seed), "simulate", "--test-type", std::string(to_string(tt)),
           "--duration", std::to_string(duration_s), "--out-dir", dir.string()},
          dir / "simulate.log");
    } else {
      sim::SimulationSpec spec;
      spec.seed = seed;
      spec.config.test_type = tt;
      spec.config.duration_s = duration_s;
      sim::write_artifacts(sim::run_simulation(spec), dir);
    }
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".csv") return e.path();
    }
    throw std::runtime_error("no run CSV in " + dir.string());
  }

  void analyze(const fs::path& out, const std::vector<fs::path>& runs) {
    fs::remove_all(out);
    fs::create_directories(out);
    if (uses_cli()) {
      std::vector<std::string> args{"analyze", "--out-dir", out.string()};
      for (const auto& r : runs) args.push_back(r.string());
      run(args, out / "analyze.log");
    } else {
      std::vector<analysis::RunFile> files;
      for (const auto& r : runs) files.push_back(analysis::read_run_file(r));
      analysis::write_analysis(analysis::analyze(files, {}), out);
    }
  }

 private:
  void run(const std::vector<std::string>& args, const fs::path& log) {
    std::string cmd = "'" + cli_ + "'";
    for (const auto& a : args) cmd += " '" + a + "'";
    cmd += " > '" + log.string() + "' 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      throw std::runtime_error("command failed: " + cmd + "\n" + read_file(log));
    }
  }

  fs::path work_;
  std::string cli_;
};

// ---------------------------------------------------------------------------
// Criteria

Outcome end_to_end(Runner& r) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto csv = r.simulate(r.work() / "ac1", 1, TestType::TVT, 60);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto rf = analysis::read_run_file(csv);
  c.expect(rf.channels.size() == 18, "channels " + std::to_string(rf.channels.size()) + " != 18");
  c.expect(rf.rows == 12480, "rows " + std::to_string(rf.rows) + " != 12480");
  std::uint64_t missing = 0;
  for (const auto& ch : rf.channels) missing += ch.missing;
  c.expect(missing == 0, std::to_string(missing) + " missing samples");

  const auto j = nlohmann::json::parse(read_file(csv.parent_path() / "integrity.json"));
  double lo = 1e9, hi = 0.0;
  std::uint64_t gaps = 0;
  for (const auto& ch : j["channels"]) {
    lo = std::min(lo, ch["achieved_rate_hz"].get<double>());
    hi = std::max(hi, ch["achieved_rate_hz"].get<double>());
    gaps += ch["gap_count"].get<std::uint64_t>();
  }
  c.expect(gaps == 0, std::to_string(gaps) + " gaps");
  c.expect(lo >= 207.0 && hi <= 209.0, "rate outside [207, 209]: " + fmt(lo, 7) + ".." + fmt(hi, 7));
  c.expect(wall < 60.0, "wall time " + fmt(wall) + " s");
  c.note("18 channels x 12480 rows, 0 gaps, rate " + fmt(lo, 7) + ".." + fmt(hi, 7) + " Hz, " + fmt(wall, 3) +
         " s wall");
  return c.outcome();
}

Outcome spectral_oracle() {
  Check c;
  const double fs = 208.0;
  const std::size_t n = 208 * 60;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * std::numbers::pi * 5.0 * static_cast<double>(i) / fs);
  x = spectra::remove_mean(x);
  const auto p = spectra::welch_psd(x, fs, {2048, 0.5});
  const auto argmax =
      static_cast<double>(std::max_element(p.values.begin(), p.values.end()) - p.values.begin());
  c.expect(std::abs(argmax - 5.0 / p.df()) <= 1.0, "sine argmax bin " + fmt(argmax));
  const double power = p.integral();
  c.expect(std::abs(power - 0.5) <= 0.005, "sine power " + fmt(power, 6));

  // Independent reference: a rectangular periodogram over whole cycles.
  const auto per = oracle::periodogram_direct(std::span(x).subspan(0, 2080), fs);
  const double per_power = std::accumulate(per.begin(), per.end(), 0.0) * fs / 2080.0;
  c.expect(std::abs(power - per_power) <= 0.01 * per_power, "Parseval vs oracle " + fmt(per_power, 6));

  // Welch against the direct-DFT Welch oracle on a shorter record.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d(0.0, 0.1);
  std::vector<double> w(3000);
  for (auto& v : w) v = d(rng);
  w = spectra::remove_mean(w);
  const auto pw = spectra::welch_psd(w, fs, {512, 0.5});
  const auto ow = oracle::welch_direct(w, fs, 512, 0.5);
  double worst = 0.0;
  for (std::size_t k = 0; k < ow.size(); ++k) worst = std::max(worst, std::abs(pw.values[k] - ow[k]) / ow[k]);
  c.expect(worst < 1e-8, "Welch vs direct DFT rel err " + fmt(worst));

  std::vector<double> noise(208 * 120);
  for (auto& v : noise) v = d(rng);
  const auto pn = spectra::welch_psd(spectra::remove_mean(noise), fs, {2048, 0.5});
  double level = 0.0;
  for (std::size_t k = 1; k + 1 < pn.size(); ++k) level += pn.values[k];
  level /= static_cast<double>(pn.size() - 2);
  const double expected = 0.01 / (fs / 2.0);
  c.expect(std::abs(level / expected - 1.0) <= 0.05, "noise level ratio " + fmt(level / expected));

  c.note("argmax " + fmt(argmax * p.df()) + " Hz, sum P df = " + fmt(power, 6) + ", noise level/expected = " +
         fmt(level / expected) + ", Welch vs DFT " + fmt(worst, 2));
  return c.outcome();
}

Outcome anpsd_laws() {
  Check c;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t cases = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t bins = 2 + rng() % 1100;
    const std::size_t channels = 1 + rng() % 18;
    std::vector<spectra::Spectrum> ps;
    for (std::size_t ch = 0; ch < channels; ++ch) {
      spectra::Spectrum s;
      for (std::size_t k = 0; k < bins; ++k) {
        s.freqs_hz.push_back(0.1 * static_cast<double>(k));
        s.values.push_back(std::pow(u(rng), 3) * std::pow(10.0, static_cast<double>(rng() % 12) - 6));
      }
      ps.push_back(s);
    }
    std::vector<spectra::Spectrum> ns;
    for (const auto& s : ps) {
      const auto n = spectra::npsd(s);
      const double sum = std::accumulate(n.values.begin(), n.values.end(), 0.0);
      c.expect(std::abs(sum - 1.0) <= 1e-9, "npsd sum " + fmt(sum, 15));
      auto scaled = s;
      const double factor = std::pow(10.0, static_cast<double>(rng() % 20) - 10);
      for (auto& v : scaled.values) v *= factor;
      const auto n2 = spectra::npsd(scaled);
      for (std::size_t k = 0; k < bins; ++k) {
        if (std::abs(n2.values[k] - n.values[k]) > 1e-12) {
          c.expect(false, "scale invariance at bin " + std::to_string(k));
          break;
        }
      }
      ns.push_back(n);
    }
    const auto a = spectra::anpsd(ns);
    const double asum = std::accumulate(a.values.begin(), a.values.end(), 0.0);
    c.expect(std::abs(asum - 1.0) <= 1e-9, "anpsd sum " + fmt(asum, 15));
    c.expect(spectra::anpsd(std::vector{ns[0]}).values == ns[0].values, "single-channel identity");
    cases += channels;
  }
  c.note(std::to_string(cases) + " spectra over 500 random ensembles");
  return c.outcome();
}

Outcome ci_correctness() {
  Check c;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::map<std::size_t, double> table{{2, 12.706}, {6, 2.571}};
  double worst = 0.0;
  for (const auto& [n, t] : table) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<spectra::Spectrum> runs(n);
      for (auto& s : runs) {
        for (std::size_t k = 0; k < 64; ++k) {
          s.freqs_hz.push_back(static_cast<double>(k));
          s.values.push_back(u(rng));
        }
      }
      const auto ci = spectra::mean_ci(runs);
      for (std::size_t k = 0; k < 64; ++k) {
        double m = 0.0;
        for (const auto& s : runs) m += s.values[k];
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (const auto& s : runs) ss += (s.values[k] - m) * (s.values[k] - m);
        const double half = t * std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
        const double lib_half = ci.upper[k] - ci.mean.values[k];
        if (half > 0) worst = std::max(worst, std::abs(lib_half - half) / half);
        worst = std::max(worst, std::abs(ci.mean.values[k] - m) / std::max(m, 1e-300));
      }
    }
  }
  c.expect(worst <= 1e-3, "t-interval rel err " + fmt(worst));

  // Coverage: 200 repetitions of n = 6 white-noise runs.
  const double sigma = 0.5, fs = 208.0, truth = 2.0 * sigma * sigma / fs;
  std::normal_distribution<double> d(0.0, sigma);
  std::size_t hits = 0, total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<spectra::Spectrum> runs;
    for (int r = 0; r < 6; ++r) {
      std::vector<double> x(256 * 20);
      for (auto& v : x) v = d(rng);
      runs.push_back(spectra::welch_psd(x, fs, {256, 0.5}));
    }
    const auto ci = spectra::mean_ci(runs);
    for (std::size_t k = 2; k + 2 < ci.mean.size(); ++k) {
      hits += ci.lower[k] <= truth && truth <= ci.upper[k];
      ++total;
    }
  }
  const double coverage = static_cast<double>(hits) / static_cast<double>(total);
  c.expect(std::abs(coverage - 0.95) <= 0.03, "coverage " + fmt(coverage));
  c.note("t-interval rel err " + fmt(worst, 2) + ", coverage " + fmt(coverage) + " over 200 trials");
  return c.outcome();
}

struct Ensemble {
  analysis::AnalysisFile mean;
  std::vector<analysis::RunFile> runs;
};

Outcome modal_shape(Runner& r) {
  Check c;
  const auto base = r.work() / "ac5";
  std::vector<fs::path> tvt_csv, avt_csv;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    tvt_csv.push_back(r.simulate(base / ("tvt" + std::to_string(seed)), seed, TestType::TVT, 60));
  }
  for (std::uint64_t seed = 7; seed <= 8; ++seed) {
    avt_csv.push_back(r.simulate(base / ("avt" + std::to_string(seed)), seed, TestType::AVT, 120));
  }
  r.analyze(base / "tvt", tvt_csv);
  r.analyze(base / "avt", avt_csv);
  const auto tvt = analysis::read_analysis(base / "tvt");
  const auto avt = analysis::read_analysis(base / "avt");
  const double df = tvt.mean.df();

  // (a) five peaks at the configured modes.
  std::vector<double> peaks;
  {
    std::ifstream in(base / "tvt" / "peaks.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("f_hz", 0) == 0) continue;
      peaks.push_back(std::stod(line.substr(0, line.find(','))));
    }
  }
  std::string loc;
  int matched = 0;
  for (const auto& mode : bus::tvt_preset().modes) {
    const auto want = std::lround(mode.f_hz / df);
    long best = 1 << 30;
    double best_f = 0.0;
    for (double f : peaks) {
      const long d = std::labs(std::lround(f / df) - want);
      if (d < best) {
        best = d;
        best_f = f;
      }
    }
    matched += best <= 2;
    loc += (loc.empty() ? "" : " ") + fmt(mode.f_hz) + "->" + fmt(best_f, 5) + "(" + std::to_string(best) + ")";
  }
  c.expect(peaks.size() == 5, std::to_string(peaks.size()) + " TVT peaks detected");
  c.expect(matched == 5, "(a) " + std::to_string(matched) + "/5 modes within 2 bins");
  c.note("(a) " + loc);

  // (b) every channel's in-band energy lower under ambient excitation.
  analysis::AnalysisParams params;
  std::map<std::string, double> tvt_energy, avt_energy;
  for (const auto& p : tvt_csv) {
    for (const auto& ch : analysis::analyze_run(analysis::read_run_file(p), params).channels) {
      tvt_energy[channel_label(ch.channel)] += ch.band_energy_g2 / static_cast<double>(tvt_csv.size());
    }
  }
  for (const auto& p : avt_csv) {
    for (const auto& ch : analysis::analyze_run(analysis::read_run_file(p), params).channels) {
      avt_energy[channel_label(ch.channel)] += ch.band_energy_g2 / static_cast<double>(avt_csv.size());
    }
  }
  double worst_ratio = 0.0;
  bool all_below = tvt_energy.size() == 18 && avt_energy.size() == 18;
  for (const auto& [label, e] : tvt_energy) {
    const double ratio = avt_energy[label] / e;
    worst_ratio = std::max(worst_ratio, ratio);
    all_below &= avt_energy[label] < e;
  }
  c.expect(all_below, "(b) AVT band energy not below TVT on every channel");
  c.note("(b) max AVT/TVT band energy " + fmt(worst_ratio, 3));

  // (c) first two in-band peaks agree.
  const auto cmp = analysis::compare(tvt, avt, 0.0, 10.0);
  c.expect(cmp.deltas.size() == 2, "(c) " + std::to_string(cmp.deltas.size()) + " peak pairs in band");
  std::string deltas;
  for (const auto& d : cmp.deltas) {
    c.expect(std::abs(d.delta_bins) <= 1.0, "(c) peak " + std::to_string(d.rank) + " off by " + fmt(d.delta_bins) + " bins");
    deltas += (deltas.empty() ? "" : " ") + fmt(d.tvt_f_hz) + "/" + fmt(d.avt_f_hz) + "Hz";
  }
  c.note("(c) " + deltas);

  // (d) same scenario, 2 runs against 6: the smaller ensemble's CI is wider.
  r.analyze(base / "tvt_pair", {tvt_csv[0], tvt_csv[1]});
  const auto two = analysis::read_analysis(base / "tvt_pair");
  auto mean_width = [&](const analysis::AnalysisFile& a) {
    double w = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < a.mean.size(); ++k) {
      if (a.mean.freqs_hz[k] > 10.0) break;
      w += a.ci_upper[k] - a.ci_lower[k];
      ++n;
    }
    return w / static_cast<double>(n);
  };
  const double w2 = mean_width(two), w6 = mean_width(tvt);
  c.expect(w2 > w6, "(d) 2-run CI width " + fmt(w2) + " <= 6-run " + fmt(w6));
  c.note("(d) CI width 2-run " + fmt(w2, 3) + " vs 6-run " + fmt(w6, 3) + "; AVT 2-run " + fmt(mean_width(avt), 3));
  return c.outcome();
}

Outcome protocol_robustness() {
  Check c;
  std::mt19937_64 rng(6);
  std::size_t roundtrip_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto m = testgen::random_message(rng);
    const auto f = proto::encode_frame(m);
    const auto r = proto::decode_frame(f);
    const auto* d = std::get_if<proto::Decoded>(&r);
    if (!d || !(d->message == m) || d->consumed != f.size()) ++roundtrip_fail;
  }
  c.expect(roundtrip_fail == 0, std::to_string(roundtrip_fail) + " round-trip failures");

  std::size_t stream_fail = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<proto::Message> sent;
    std::vector<std::uint8_t> bytes;
    for (int i = 0; i < 50; ++i) {
      for (std::size_t g = rng() % 64; g > 0; --g) {
        auto b = static_cast<std::uint8_t>(rng());
        bytes.push_back(b == 0x56 ? 0x00 : b);
      }
      sent.push_back(testgen::random_message(rng));
      proto::append_frame(sent.back(), bytes);
    }
    proto::FrameDecoder dec;
    std::vector<proto::Message> got;
    for (std::size_t pos = 0; pos < bytes.size();) {
      const auto n = std::min<std::size_t>(1 + rng() % 300, bytes.size() - pos);
      dec.feed(std::span(bytes.data() + pos, n));
      pos += n;
      while (auto m = dec.next()) got.push_back(std::move(*m));
    }
    stream_fail += got != sent;
  }
  c.expect(stream_fail == 0, std::to_string(stream_fail) + "/100 garbage streams mis-decoded");

  std::uint64_t flips = 0, undetected = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto good = proto::encode_frame(testgen::random_message(rng));
    for (std::size_t byte = 0; byte < good.size(); ++byte) {
      for (int bit = 0; bit < 8; ++bit) {
        auto f = good;
        f[byte] ^= static_cast<std::uint8_t>(1u << bit);
        ++flips;
        undetected += std::holds_alternative<proto::Decoded>(proto::decode_frame(f));
      }
    }
  }
  c.expect(undetected == 0, std::to_string(undetected) + " undetected bit flips");
  c.note("10000 round-trips, 100 garbage streams, " + std::to_string(flips) + " single-bit flips detected");
  return c.outcome();
}

Outcome loss_accounting() {
  Check c;
  sim::SimulationSpec spec;
  spec.seed = 7;
  spec.config.duration_s = 60;
  spec.faults.loss_probability = 0.05;
  spec.faults.drops.push_back({20.0, 3.0, std::nullopt});
  spec.buffer_seconds = 1.0;
  const auto r = sim::run_simulation(spec);
  c.expect(r.ok(), "run not complete: " + r.session.error);

  std::uint64_t expected_minus_received = 0, gap_total = 0;
  for (const auto& [id, series] : r.dataset.sensors()) {
    const auto expected = r.dataset.expected(id);
    expected_minus_received += expected - series.received();
    for (const auto& g : series.gaps(expected)) gap_total += g.length;
  }
  std::uint64_t overflow = 0;
  for (const auto& s : r.slaves) {
    for (const auto& g : s.overflow_gaps) overflow += g.length;
  }
  const auto transport = r.transport.samples_lost();
  c.expect(expected_minus_received == gap_total, "expected-received " + std::to_string(expected_minus_received) +
                                                     " != gap total " + std::to_string(gap_total));
  c.expect(expected_minus_received == overflow + transport,
           "deficit " + std::to_string(expected_minus_received) + " != overflow " + std::to_string(overflow) +
               " + transport " + std::to_string(transport));
  c.expect(expected_minus_received > 0, "no loss was injected");
  c.note("deficit " + std::to_string(expected_minus_received) + " = gaps " + std::to_string(gap_total) +
         " = overflow " + std::to_string(overflow) + " + transport " + std::to_string(transport));
  return c.outcome();
}

Outcome determinism(Runner& r) {
  Check c;
  const auto base = r.work() / "ac8";
  const auto a = r.simulate(base / "a", 42, TestType::TVT, 60);
  const auto b = r.simulate(base / "b", 42, TestType::TVT, 60);
  const auto csv_a = read_file(a), csv_b = read_file(b);
  c.expect(!csv_a.empty() && csv_a == csv_b, "run CSVs differ");

  r.analyze(base / "an1", {a});
  r.analyze(base / "an2", {a});
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(base / "an1")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    c.expect(read_file(e.path()) == read_file(base / "an2" / e.path().filename()),
             e.path().filename().string() + " differs");
  }
  c.expect(files >= 3, "only " + std::to_string(files) + " analysis CSVs");
  c.note("run CSV " + std::to_string(csv_a.size()) + " bytes identical, " + std::to_string(files) +
         " analysis CSVs identical");
  return c.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "vibedaq_acceptance";
  std::string cli;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--work-dir") work = argv[i + 1];
    else if (key == "--vibedaq") cli = argv[i + 1];
    else {
      std::cerr << "usage: vibedaq_acceptance [--work-dir DIR] [--vibedaq PATH]\n";
      return 2;
    }
  }
  fs::create_directories(work);
  Runner runner(work, cli);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 end-to-end fidelity", [&] { return end_to_end(runner); }},
      {"AC2 spectral oracle", spectral_oracle},
      {"AC3 ANPSD laws", anpsd_laws},
      {"AC4 CI correctness", ci_correctness},
      {"AC5 modal-shape reproduction", [&] { return modal_shape(runner); }},
      {"AC6 protocol robustness", protocol_robustness},
      {"AC7 loss accounting", loss_accounting},
      {"AC8 determinism", [&] { return determinism(runner); }},
  };

  std::cout << "driver: " << (runner.uses_cli() ? "vibedaq CLI " + cli : std::string("library")) << "\n";
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
