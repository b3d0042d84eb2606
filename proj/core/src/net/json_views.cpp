#include "json_views.hpp"

#include <algorithm>

#include "vibedaq/core/clock.hpp"

namespace vibedaq::net {

Json to_json(const AcquisitionConfig& cfg) {
  Json j;
  j["run_id"] = cfg.run_id;
  j["test_type"] = std::string(to_string(cfg.test_type));
  j["fs_hz"] = cfg.odr_hz;
  j["range_g"] = cfg.range_g;
  j["duration_s"] = cfg.duration_s;
  return j;
}

Json to_json(const master::IntegrityReport& r) {
  Json j;
  j["total_expected"] = r.total_expected();
  j["total_received"] = r.total_received();
  j["total_gaps"] = r.total_gaps();
  auto& chans = j["channels"] = Json::array();
  for (const auto& c : r.channels) {
    chans.push_back({{"channel", channel_label(c.channel)},
                     {"expected", c.expected},
                     {"received", c.received},
                     {"gap_count", c.gap_count},
                     {"longest_gap", c.longest_gap},
                     {"achieved_rate_hz", c.achieved_rate_hz},
                     {"insufficient", c.insufficient},
                     {"saturation", c.saturation}});
  }
  return j;
}

Json to_json(const master::LiveFrame& f) {
  Json j;
  j["t_us"] = f.t_us;
  auto& ch = j["channels"] = Json::object();
  for (const auto& [label, values] : f.channels) ch[label] = values;
  auto& health = j["health"] = Json::object();
  for (const auto& [label, h] : f.health) health[label] = {{"rate_hz", h.rate_hz}, {"gaps", h.gaps}};
  return j;
}

Json session_json(const master::RunSession& s) {
  Json j;
  j["run_id"] = s.run_id;
  j["status"] = std::string(master::to_string(s.status));
  j["config"] = to_json(s.config);
  j["participants"] = s.participants;
  j["start_utc"] = s.start_us ? format_utc(s.start_us) : "";
  j["end_utc"] = s.end_us ? format_utc(s.end_us) : "";
  auto& off = j["clock_offsets_us"] = Json::object();
  for (const auto& [id, o] : s.offsets) off[std::to_string(id)] = {{"offset_us", o.offset_us}, {"rtt_us", o.rtt_us}};
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

Json slaves_json(const master::Coordinator& c, std::uint64_t now_us) {
  Json arr = Json::array();
  for (const auto& s : c.slaves()) {
    Json sensors = Json::array();
    for (auto m : s.mux_channels) sensors.push_back(sensor_label({s.slave_id, m}));
    Json o;
    o["slave_id"] = s.slave_id;
    o["connected"] = s.connected;
    o["mux_channels"] = s.mux_channels;
    o["sensors"] = sensors;
    o["samples_acquired"] = s.samples_acquired;
    o["last_heartbeat_age_s"] =
        s.last_heartbeat_us ? static_cast<double>(now_us - std::min(now_us, s.last_heartbeat_us)) / 1e6 : -1.0;
    arr.push_back(std::move(o));
  }
  return arr;
}

Json status_json(const master::Coordinator& c, std::uint64_t now_us) {
  Json j;
  const auto active = c.active_run();
  Json m;
  m["state"] = active ? std::string(master::to_string(c.session(*active)->status)) : "IDLE";
  m["active_run"] = active ? Json(*active) : Json(nullptr);
  m["runs"] = c.run_ids().size();
  m["protocol_warnings"] = c.protocol_warnings();
  m["time_utc"] = format_utc(now_us);
  j["master"] = m;
  auto slaves = slaves_json(c, now_us);
  for (auto& s : slaves) {
    const auto id = s["slave_id"].get<std::uint8_t>();
    std::string state = s["connected"].get<bool>() ? "CONNECTED" : "DISCONNECTED";
    if (active) {
      const auto& p = c.session(*active)->participants;
      if (std::find(p.begin(), p.end(), id) != p.end() && s["connected"].get<bool>()) {
        state = std::string(master::to_string(c.session(*active)->status));
      }
    }
    s["state"] = state;
  }
  j["slaves"] = slaves;
  return j;
}

AcquisitionConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("body must be a JSON object");
  AcquisitionConfig cfg;
  try {
    if (j.contains("test_type")) {
      auto tt = parse_test_type(j.at("test_type").get<std::string>());
      if (!tt) throw std::invalid_argument("test_type must be TVT or AVT");
      cfg.test_type = *tt;
    }
    if (j.contains("fs_hz")) cfg.odr_hz = j.at("fs_hz").get<double>();
    if (j.contains("range_g")) cfg.range_g = j.at("range_g").get<int>();
    if (j.contains("duration_s")) {
      const auto d = j.at("duration_s").get<double>();
      if (d < 0 || d != static_cast<double>(static_cast<std::uint32_t>(d))) {
        throw std::invalid_argument("duration_s must be a whole number of seconds");
      }
      cfg.duration_s = static_cast<std::uint32_t>(d);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad field type: ") + e.what());
  }
  return cfg;
}

}  // namespace vibedaq::net
