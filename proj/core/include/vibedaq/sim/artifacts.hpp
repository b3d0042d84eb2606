#pragma once

#include <filesystem>
#include <string>

#include "vibedaq/master/coordinator.hpp"
#include "vibedaq/master/integrity.hpp"
#include "vibedaq/sim/simulation.hpp"

namespace vibedaq::sim {

struct ArtifactPaths {
  std::filesystem::path csv;
  std::filesystem::path integrity;
  std::filesystem::path summary;
};

/// Integrity report as JSON text (stable key order, two-space indent).
std::string integrity_json(const master::RunSession& session, const master::IntegrityReport& r);

std::string summary_json(const SimulationResult& result);

/// Writes run_<id>.csv, integrity.json and summary.json into `dir`. The CSV
/// is written only for runs that produced a dataset.
ArtifactPaths write_artifacts(const SimulationResult& result, const std::filesystem::path& dir);

}  // namespace vibedaq::sim
