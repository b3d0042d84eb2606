#include "vibedaq/sim/artifacts.hpp"

#include <fstream>
#include <json.hpp>

#include "vibedaq/core/clock.hpp"
#include "vibedaq/master/csv_writer.hpp"

namespace vibedaq::sim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json integrity_object(const master::RunSession& session, const master::IntegrityReport& r) {
  ordered_json j;
  j["run_id"] = session.run_id;
  j["status"] = std::string(master::to_string(session.status));
  j["total_expected"] = r.total_expected();
  j["total_received"] = r.total_received();
  j["total_gaps"] = r.total_gaps();
  j["total_missing"] = r.total_missing();
  auto& chans = j["channels"] = ordered_json::array();
  for (const auto& c : r.channels) {
    ordered_json o;
    o["channel"] = channel_label(c.channel);
    o["expected"] = c.expected;
    o["received"] = c.received;
    o["gap_count"] = c.gap_count;
    o["longest_gap"] = c.longest_gap;
    o["missing"] = c.missing;
    o["achieved_rate_hz"] = c.achieved_rate_hz;
    o["insufficient"] = c.insufficient;
    o["saturation"] = c.saturation;
    chans.push_back(std::move(o));
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string integrity_json(const master::RunSession& session, const master::IntegrityReport& r) {
  return integrity_object(session, r).dump(2) + "\n";
}

std::string summary_json(const SimulationResult& res) {
  const auto& s = res.session;
  ordered_json j;
  j["run_id"] = s.run_id;
  j["seed"] = res.seed;
  j["status"] = std::string(master::to_string(s.status));
  j["error"] = s.error;
  j["config"] = {{"test_type", std::string(to_string(s.config.test_type))},
                 {"fs_hz", s.config.odr_hz},
                 {"range_g", s.config.range_g},
                 {"duration_s", s.config.duration_s}};
  j["start_utc"] = s.start_us ? format_utc(s.start_us) : "";
  j["simulated_s"] = res.simulated_s;
  j["rows"] = res.dataset.row_count();
  j["channels"] = res.integrity.channels.size();

  auto& slaves = j["slaves"] = ordered_json::array();
  for (const auto& r : res.slaves) {
    ordered_json o;
    o["slave_id"] = r.slave_id;
    o["ticks"] = r.ticks;
    o["overflow_dropped"] = r.overflow_dropped;
    auto& gaps = o["overflow_gaps"] = ordered_json::array();
    for (const auto& g : r.overflow_gaps) {
      gaps.push_back({{"sensor", sensor_label({r.slave_id, g.mux_channel})},
                      {"seq_start", g.seq_start},
                      {"length", g.length}});
    }
    o["buffer_high_watermark"] = r.buffer_high_watermark;
    o["max_lateness_us"] = r.max_lateness_us;
    o["mean_lateness_us"] = r.mean_lateness_us;
    o["mean_intra_tick_skew_us"] = r.mean_intra_tick_skew_us;
    o["true_offset_us"] = r.true_offset_us;
    o["estimated_offset_us"] = r.estimated_offset_us;
    o["drift_ppm"] = r.drift_ppm;
    o["reconnects"] = r.reconnects;
    slaves.push_back(std::move(o));
  }

  const auto& t = res.transport;
  j["transport"] = {{"frames_sent", t.frames_sent},
                    {"bytes_sent", t.bytes_sent},
                    {"data_frames_lost", t.data_frames_lost},
                    {"heartbeats_lost", t.heartbeats_lost},
                    {"samples_lost_random", t.samples_lost_random},
                    {"samples_lost_in_flight", t.samples_lost_in_flight},
                    {"decode_errors", t.decode_errors}};

  std::uint64_t overflow = 0;
  for (const auto& r : res.slaves) overflow += r.overflow_dropped;
  j["accounting"] = {{"unit", "sensor samples"},
                     {"deficit", res.deficit()},
                     {"transport_lost", t.samples_lost()},
                     {"overflow_dropped", overflow},
                     {"balanced", res.deficit() == res.explained_loss()}};
  j["protocol_warnings"] = res.protocol_warnings;
  return j.dump(2) + "\n";
}

ArtifactPaths write_artifacts(const SimulationResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  ArtifactPaths p;
  if (result.session.run_id != 0) {
    p.csv = dir / ("run_" + std::to_string(result.session.run_id) + ".csv");
    master::RunMetadata meta{result.session.config, result.session.start_us, result.seed};
    master::write_csv(meta, result.dataset, p.csv);
  }
  p.integrity = dir / "integrity.json";
  write_text(p.integrity, integrity_json(result.session, result.integrity));
  p.summary = dir / "summary.json";
  write_text(p.summary, summary_json(result));
  return p;
}

}  // namespace vibedaq::sim
