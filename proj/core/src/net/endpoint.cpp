#include "vibedaq/net/endpoint.hpp"

#include <charconv>

namespace vibedaq::net {

HostPort parse_host_port(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("expected host:port, got '" + std::string(text) + "'");
  HostPort hp;
  hp.host = std::string(text.substr(0, colon));
  if (hp.host.empty()) hp.host = "0.0.0.0";
  const auto port = text.substr(colon + 1);
  unsigned value = 0;
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || p != port.data() + port.size() || value > 65535) {
    throw std::invalid_argument("bad port in '" + std::string(text) + "'");
  }
  hp.port = static_cast<std::uint16_t>(value);
  return hp;
}

}  // namespace vibedaq::net
