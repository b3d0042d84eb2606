#include "vibedaq/master/csv_writer.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include "vibedaq/core/clock.hpp"

namespace vibedaq::master {

namespace {

void append_g(std::string& line, double g) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.6g", g);
  line.append(buf, static_cast<std::size_t>(n));
}

std::string format_rate(double hz) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", hz);
  return buf;
}

}  // namespace

std::string metadata_line(const RunMetadata& meta) {
  const auto& c = meta.config;
  std::string line = "# run_id=" + std::to_string(c.run_id) +
                     ",test_type=" + std::string(to_string(c.test_type)) +
                     ",fs_hz=" + format_rate(c.odr_hz) +
                     ",range_g=" + std::to_string(c.range_g) +
                     ",start_utc=" + format_utc(meta.start_us);
  if (meta.seed) line += ",seed=" + std::to_string(*meta.seed);
  return line;
}

void render_csv(const RunMetadata& meta, const RunDataset& ds, std::ostream& out) {
  out << "# vibedaq-run v1\n" << metadata_line(meta) << '\n';

  std::vector<std::pair<SensorId, const SensorSeries*>> cols;
  std::string header = "seq";
  for (const auto& [id, series] : ds.sensors()) {
    cols.emplace_back(id, &series);
    const auto s = sensor_label(id);
    header += ",t_" + s + "_us";
    for (auto a : kAxes) header += "," + s + "_" + axis_char(a) + "_g";
  }
  out << header << '\n';

  const int range = meta.config.range_g;
  const std::uint64_t rows = ds.row_count();
  std::string line;
  for (std::uint64_t seq = 0; seq < rows; ++seq) {
    line.clear();
    line += std::to_string(seq);
    for (const auto& [id, series] : cols) {
      const auto* s = series->at(static_cast<std::uint32_t>(seq));
      if (!s) {
        line += ",,,,";
        continue;
      }
      line += ',';
      line += std::to_string(s->t_master_us);
      for (std::size_t a = 0; a < 3; ++a) {
        line += ',';
        append_g(line, raw_to_g(s->raw[a], range));
      }
    }
    line += '\n';
    out << line;
  }
}

void write_csv(const RunMetadata& meta, const RunDataset& ds, const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw CsvWriteError("cannot open " + tmp.string());
      render_csv(meta, ds, out);
      out.flush();
      if (!out) throw CsvWriteError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::remove(tmp, ec);
    if (dynamic_cast<const CsvWriteError*>(&e)) throw;
    throw CsvWriteError(std::string("cannot write ") + path.string() + ": " + e.what());
  }
}

}  // namespace vibedaq::master
