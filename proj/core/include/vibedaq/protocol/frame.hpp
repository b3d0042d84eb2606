#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "vibedaq/protocol/messages.hpp"

namespace vibedaq::proto {

// Frame layout, little-endian throughout:
//   "VDAQ" | version u8 | msg_type u8 | payload_len u32 | payload | crc32 u32
// The CRC covers version through the end of the payload.
inline constexpr std::uint8_t kMagic[4] = {0x56, 0x44, 0x41, 0x51};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;
inline constexpr std::size_t kTrailerSize = 4;
inline constexpr std::size_t kMaxPayload = 1u << 20;

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode_payload(const Message& msg);
std::vector<std::uint8_t> encode_frame(const Message& msg);
/// Appends the frame to `out`, avoiding a temporary buffer.
void append_frame(const Message& msg, std::vector<std::uint8_t>& out);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

enum class DecodeErrorKind {
  BadMagic,     // resync: scan for the next magic
  BadLength,    // payload_len above the limit
  Integrity,    // CRC mismatch; frame discarded
  Unsupported,  // unknown version or message type
  Malformed,    // CRC fine but payload violates the schema
};

struct Decoded {
  Message message;
  std::size_t consumed = 0;
};

struct NeedMore {};

struct DecodeError {
  DecodeErrorKind kind;
  /// Bytes to discard before trying again.
  std::size_t skip = 1;
};

using DecodeResult = std::variant<Decoded, NeedMore, DecodeError>;

/// Decodes one frame from the front of `buffer`.
DecodeResult decode_frame(std::span<const std::uint8_t> buffer);

/// Incremental decoder for one byte stream. Garbage and corrupted frames are
/// skipped; only frames that pass every check are returned.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Message> next();

  std::size_t buffered() const { return buf_.size() - pos_; }
  std::uint64_t errors(DecodeErrorKind k) const { return errors_[static_cast<std::size_t>(k)]; }
  std::uint64_t total_errors() const;

 private:
  void compact();

  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
  std::uint64_t errors_[5] = {};
};

}  // namespace vibedaq::proto
