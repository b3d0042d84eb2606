#include "vibedaq/analysis/run_file.hpp"

#include <charconv>
#include <fstream>
#include <string_view>

namespace vibedaq::analysis {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

std::optional<SensorId> parse_sensor(std::string_view label) {
  const auto parts = split(label, '_');
  if (parts.size() != 2) return std::nullopt;
  auto mux = parse_number<unsigned>(parts[0]);
  auto slave = parse_number<unsigned>(parts[1]);
  if (!mux || !slave || *mux > 7 || *slave < 1 || *slave > 255) return std::nullopt;
  return SensorId{static_cast<std::uint8_t>(*slave), static_cast<std::uint8_t>(*mux)};
}

}  // namespace

RunFile parse_run_file(std::istream& in, const std::string& source) {
  RunFile rf;
  rf.source = source;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) { throw RunFileError(source, lineno, what); };
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "# vibedaq-run v1") {
    fail("expected '# vibedaq-run v1'");
  }
  if (!next_line() || line.rfind("# ", 0) != 0) fail("expected run metadata line");
  for (auto kv : split(std::string_view(line).substr(2), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) fail("malformed metadata entry '" + std::string(kv) + "'");
    rf.metadata[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
  }
  for (const char* key : {"run_id", "test_type", "fs_hz", "range_g", "start_utc"}) {
    if (!rf.metadata.count(key)) fail(std::string("metadata missing ") + key);
  }
  auto run_id = parse_number<std::uint32_t>(rf.metadata["run_id"]);
  auto tt = parse_test_type(rf.metadata["test_type"]);
  auto fs = parse_number<double>(rf.metadata["fs_hz"]);
  auto range = parse_number<int>(rf.metadata["range_g"]);
  if (!run_id) fail("bad run_id");
  if (!tt) fail("bad test_type");
  if (!fs || !(*fs > 0.0)) fail("bad fs_hz");
  if (!range || *range <= 0) fail("bad range_g");
  rf.run_id = *run_id;
  rf.test_type = *tt;
  rf.fs_hz = *fs;
  rf.range_g = *range;

  if (!next_line()) fail("missing column header");
  const auto cols = split(line, ',');
  if (cols.empty() || cols[0] != "seq" || (cols.size() - 1) % 4 != 0) {
    fail("column header must be seq followed by groups of t,x,y,z");
  }
  for (std::size_t i = 1; i < cols.size(); i += 4) {
    const auto t = cols[i];
    if (t.size() < 6 || t.substr(0, 2) != "t_" || t.substr(t.size() - 3) != "_us") {
      fail("bad timestamp column '" + std::string(t) + "'");
    }
    const auto label = t.substr(2, t.size() - 5);
    auto sensor = parse_sensor(label);
    if (!sensor) fail("bad sensor label '" + std::string(label) + "'");
    for (std::size_t a = 0; a < 3; ++a) {
      const std::string want = std::string(label) + "_" + axis_char(kAxes[a]) + "_g";
      if (cols[i + 1 + a] != want) fail("expected column '" + want + "'");
      rf.channels.push_back({{sensor->slave_id, sensor->mux_channel, kAxes[a]}, {}, 0});
    }
    rf.sensors.push_back(*sensor);
  }

  const std::size_t nsensors = rf.sensors.size();
  while (next_line()) {
    if (line.empty()) fail("empty data row");
    const auto f = split(line, ',');
    if (f.size() != 1 + 4 * nsensors) {
      fail("expected " + std::to_string(1 + 4 * nsensors) + " fields, found " +
           std::to_string(f.size()));
    }
    auto seq = parse_number<std::uint64_t>(f[0]);
    if (!seq || *seq != rf.rows) fail("expected seq " + std::to_string(rf.rows));
    for (std::size_t s = 0; s < nsensors; ++s) {
      const std::size_t base = 1 + 4 * s;
      const bool empty_t = f[base].empty();
      if (!empty_t && !parse_number<std::int64_t>(f[base])) fail("bad timestamp");
      for (std::size_t a = 0; a < 3; ++a) {
        auto& ch = rf.channels[3 * s + a];
        const auto field = f[base + 1 + a];
        if (field.empty() != empty_t) fail("partially missing sample");
        if (field.empty()) {
          ++ch.missing;
          continue;
        }
        auto v = parse_number<double>(field);
        if (!v) fail("bad value '" + std::string(field) + "'");
        ch.values.push_back(*v);
      }
    }
    ++rf.rows;
  }
  return rf;
}

RunFile read_run_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunFileError(path.string(), 0, "cannot open");
  return parse_run_file(in, path.string());
}

}  // namespace vibedaq::analysis
