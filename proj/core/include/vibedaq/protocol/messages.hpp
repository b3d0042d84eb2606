#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "vibedaq/core/types.hpp"

namespace vibedaq::proto {

enum class MsgType : std::uint8_t {
  Hello = 0x01,
  Config = 0x02,
  Start = 0x03,
  Stop = 0x04,
  DataBatch = 0x05,
  Heartbeat = 0x06,
  Ack = 0x07,
  TimesyncReq = 0x08,
  TimesyncResp = 0x09,
  RunEnd = 0x0A,
};

std::string_view to_string(MsgType t);
bool is_known_type(std::uint8_t t);

struct Hello {
  std::uint8_t slave_id = 0;
  std::vector<std::uint8_t> mux_channels;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct Config {
  AcquisitionConfig config;
  friend bool operator==(const Config&, const Config&) = default;
};

struct Start {
  std::uint64_t scheduled_start_us = 0;
  friend bool operator==(const Start&, const Start&) = default;
};

struct Stop {
  friend bool operator==(const Stop&, const Stop&) = default;
};

struct BatchRecord {
  std::uint64_t t_local_us = 0;
  std::int16_t x = 0, y = 0, z = 0;
  friend bool operator==(const BatchRecord&, const BatchRecord&) = default;
};

/// Records cover sequence numbers [seq_first, seq_first + records.size()).
struct DataBatch {
  std::uint8_t slave_id = 0;
  std::uint8_t mux_channel = 0;
  std::uint32_t seq_first = 0;
  std::vector<BatchRecord> records;
  friend bool operator==(const DataBatch&, const DataBatch&) = default;
};

struct Heartbeat {
  std::uint8_t slave_id = 0;
  std::uint64_t samples_acquired = 0;
  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

inline constexpr std::uint8_t kAckOk = 0;
inline constexpr std::uint8_t kAckError = 1;

struct Ack {
  MsgType acked = MsgType::Hello;
  std::uint8_t status = kAckOk;
  friend bool operator==(const Ack&, const Ack&) = default;
};

struct TimesyncReq {
  std::uint64_t t1_us = 0;
  friend bool operator==(const TimesyncReq&, const TimesyncReq&) = default;
};

struct TimesyncResp {
  std::uint64_t t1_us = 0, t2_us = 0, t3_us = 0;
  friend bool operator==(const TimesyncResp&, const TimesyncResp&) = default;
};

/// total_samples counts ticks executed, i.e. sample slots per sensor.
struct RunEnd {
  std::uint8_t slave_id = 0;
  std::uint64_t total_samples = 0;
  friend bool operator==(const RunEnd&, const RunEnd&) = default;
};

using Message = std::variant<Hello, Config, Start, Stop, DataBatch, Heartbeat, Ack, TimesyncReq,
                             TimesyncResp, RunEnd>;

MsgType type_of(const Message& m);

inline constexpr std::size_t kBatchHeaderSize = 1 + 1 + 4 + 2;
inline constexpr std::size_t kBatchRecordSize = 8 + 2 + 2 + 2;

}  // namespace vibedaq::proto
