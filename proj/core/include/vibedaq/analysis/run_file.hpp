#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vibedaq/core/types.hpp"

namespace vibedaq::analysis {

class RunFileError : public std::runtime_error {
 public:
  RunFileError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ChannelData {
  ChannelId channel;
  /// Values in g with missing samples dropped.
  std::vector<double> values;
  std::uint64_t missing = 0;

  double missing_fraction() const {
    const auto total = values.size() + missing;
    return total ? static_cast<double>(missing) / static_cast<double>(total) : 0.0;
  }
};

/// A run CSV read back into per-channel series.
struct RunFile {
  std::string source;
  std::map<std::string, std::string> metadata;
  std::uint32_t run_id = 0;
  TestType test_type = TestType::TVT;
  double fs_hz = 0.0;
  int range_g = 0;
  std::vector<SensorId> sensors;
  std::vector<ChannelData> channels;
  std::uint64_t rows = 0;
};

RunFile parse_run_file(std::istream& in, const std::string& source);
RunFile read_run_file(const std::filesystem::path& path);

}  // namespace vibedaq::analysis
