#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "vibedaq/master/dataset.hpp"

namespace vibedaq::master {

struct RunMetadata {
  AcquisitionConfig config;
  /// Master-epoch microseconds of the scheduled start.
  std::uint64_t start_us = 0;
  /// Present for simulated runs.
  std::optional<std::uint64_t> seed;
};

class CsvWriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "# run_id=...,test_type=...,fs_hz=...,range_g=...,start_utc=...[,seed=...]"
std::string metadata_line(const RunMetadata& meta);

/// Streams the run file: two comment lines, the column row, then one row
/// per seq. Values use six significant digits, timestamps integer µs.
void render_csv(const RunMetadata& meta, const RunDataset& ds, std::ostream& out);

/// Writes through a temporary file in the same directory and renames it
/// into place; nothing is left behind on failure.
void write_csv(const RunMetadata& meta, const RunDataset& ds, const std::filesystem::path& path);

}  // namespace vibedaq::master
