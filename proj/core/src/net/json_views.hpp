#pragma once

#include <json.hpp>

#include "vibedaq/master/coordinator.hpp"
#include "vibedaq/master/integrity.hpp"
#include "vibedaq/master/live.hpp"

namespace vibedaq::net {

using Json = nlohmann::ordered_json;

Json to_json(const AcquisitionConfig& cfg);
Json to_json(const master::IntegrityReport& r);
Json to_json(const master::LiveFrame& f);
Json session_json(const master::RunSession& s);
Json slaves_json(const master::Coordinator& c, std::uint64_t now_us);
Json status_json(const master::Coordinator& c, std::uint64_t now_us);

/// Reads {test_type, fs_hz, range_g, duration_s}; missing keys keep their
/// defaults. Throws std::invalid_argument on wrong types or unknown values.
AcquisitionConfig config_from_json(const Json& j);

}  // namespace vibedaq::net
