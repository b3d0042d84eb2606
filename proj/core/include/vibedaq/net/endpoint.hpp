#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vibedaq::net {

struct HostPort {
  std::string host;
  std::uint16_t port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Parses "host:port" (host may be empty for all interfaces). Throws
/// std::invalid_argument on malformed input.
HostPort parse_host_port(std::string_view text);

}  // namespace vibedaq::net
