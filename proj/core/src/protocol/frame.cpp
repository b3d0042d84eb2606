#include "vibedaq/protocol/frame.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <limits>

namespace vibedaq::proto {

std::string_view to_string(MsgType t) {
  switch (t) {
    case MsgType::Hello: return "HELLO";
    case MsgType::Config: return "CONFIG";
    case MsgType::Start: return "START";
    case MsgType::Stop: return "STOP";
    case MsgType::DataBatch: return "DATA_BATCH";
    case MsgType::Heartbeat: return "HEARTBEAT";
    case MsgType::Ack: return "ACK";
    case MsgType::TimesyncReq: return "TIMESYNC_REQ";
    case MsgType::TimesyncResp: return "TIMESYNC_RESP";
    case MsgType::RunEnd: return "RUN_END";
  }
  return "UNKNOWN";
}

bool is_known_type(std::uint8_t t) { return t >= 0x01 && t <= 0x0A; }

MsgType type_of(const Message& m) {
  struct Visitor {
    MsgType operator()(const Hello&) const { return MsgType::Hello; }
    MsgType operator()(const Config&) const { return MsgType::Config; }
    MsgType operator()(const Start&) const { return MsgType::Start; }
    MsgType operator()(const Stop&) const { return MsgType::Stop; }
    MsgType operator()(const DataBatch&) const { return MsgType::DataBatch; }
    MsgType operator()(const Heartbeat&) const { return MsgType::Heartbeat; }
    MsgType operator()(const Ack&) const { return MsgType::Ack; }
    MsgType operator()(const TimesyncReq&) const { return MsgType::TimesyncReq; }
    MsgType operator()(const TimesyncResp&) const { return MsgType::TimesyncResp; }
    MsgType operator()(const RunEnd&) const { return MsgType::RunEnd; }
  };
  return std::visit(Visitor{}, m);
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; frames are bounded well below that.
  crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t>& out_;
};

struct Underflow {};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::uint64_t le(std::size_t n) {
    if (remaining() < n) throw Underflow{};
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_payload(const Message& msg, Writer& w) {
  struct Visitor {
    Writer& w;
    void operator()(const Hello& m) const {
      if (m.mux_channels.size() > 255) throw EncodeError("HELLO: too many sensors");
      w.u8(m.slave_id);
      w.u8(static_cast<std::uint8_t>(m.mux_channels.size()));
      for (auto c : m.mux_channels) w.u8(c);
    }
    void operator()(const Config& m) const {
      const auto& c = m.config;
      if (c.range_g < 0 || c.range_g > 255) throw EncodeError("CONFIG: range_g out of range");
      w.u32(c.run_id);
      w.u8(static_cast<std::uint8_t>(c.test_type));
      w.u32(odr_millihertz(c.odr_hz));
      w.u8(static_cast<std::uint8_t>(c.range_g));
      w.u32(c.duration_s);
      w.u64(c.scheduled_start_us);
    }
    void operator()(const Start& m) const { w.u64(m.scheduled_start_us); }
    void operator()(const Stop&) const {}
    void operator()(const DataBatch& m) const {
      if (m.records.empty()) throw EncodeError("DATA_BATCH: count must be >= 1");
      if (m.records.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw EncodeError("DATA_BATCH: count exceeds 65535");
      }
      w.u8(m.slave_id);
      w.u8(m.mux_channel);
      w.u32(m.seq_first);
      w.u16(static_cast<std::uint16_t>(m.records.size()));
      for (const auto& r : m.records) {
        w.u64(r.t_local_us);
        w.i16(r.x);
        w.i16(r.y);
        w.i16(r.z);
      }
    }
    void operator()(const Heartbeat& m) const {
      w.u8(m.slave_id);
      w.u64(m.samples_acquired);
    }
    void operator()(const Ack& m) const {
      w.u8(static_cast<std::uint8_t>(m.acked));
      w.u8(m.status);
    }
    void operator()(const TimesyncReq& m) const { w.u64(m.t1_us); }
    void operator()(const TimesyncResp& m) const {
      w.u64(m.t1_us);
      w.u64(m.t2_us);
      w.u64(m.t3_us);
    }
    void operator()(const RunEnd& m) const {
      w.u8(m.slave_id);
      w.u64(m.total_samples);
    }
  };
  std::visit(Visitor{w}, msg);
}

std::optional<Message> read_payload(MsgType type, std::span<const std::uint8_t> payload) {
  Reader r(payload);
  Message out;
  switch (type) {
    case MsgType::Hello: {
      Hello m;
      m.slave_id = r.u8();
      const auto n = r.u8();
      for (unsigned i = 0; i < n; ++i) m.mux_channels.push_back(r.u8());
      out = std::move(m);
      break;
    }
    case MsgType::Config: {
      Config m;
      m.config.run_id = r.u32();
      const auto tt = r.u8();
      if (tt > 1) return std::nullopt;
      m.config.test_type = static_cast<TestType>(tt);
      m.config.odr_hz = static_cast<double>(r.u32()) / 1000.0;
      m.config.range_g = r.u8();
      m.config.duration_s = r.u32();
      m.config.scheduled_start_us = r.u64();
      out = m;
      break;
    }
    case MsgType::Start: out = Start{r.u64()}; break;
    case MsgType::Stop: out = Stop{}; break;
    case MsgType::DataBatch: {
      DataBatch m;
      m.slave_id = r.u8();
      m.mux_channel = r.u8();
      m.seq_first = r.u32();
      const auto count = r.u16();
      if (count == 0 || r.remaining() != static_cast<std::size_t>(count) * kBatchRecordSize) {
        return std::nullopt;
      }
      m.records.resize(count);
      for (auto& rec : m.records) {
        rec.t_local_us = r.u64();
        rec.x = r.i16();
        rec.y = r.i16();
        rec.z = r.i16();
      }
      out = std::move(m);
      break;
    }
    case MsgType::Heartbeat: {
      Heartbeat m;
      m.slave_id = r.u8();
      m.samples_acquired = r.u64();
      out = m;
      break;
    }
    case MsgType::Ack: {
      const auto acked = r.u8();
      if (!is_known_type(acked)) return std::nullopt;
      Ack m;
      m.acked = static_cast<MsgType>(acked);
      m.status = r.u8();
      out = m;
      break;
    }
    case MsgType::TimesyncReq: out = TimesyncReq{r.u64()}; break;
    case MsgType::TimesyncResp: {
      TimesyncResp m;
      m.t1_us = r.u64();
      m.t2_us = r.u64();
      m.t3_us = r.u64();
      out = m;
      break;
    }
    case MsgType::RunEnd: {
      RunEnd m;
      m.slave_id = r.u8();
      m.total_samples = r.u64();
      out = m;
      break;
    }
  }
  if (!r.done()) return std::nullopt;
  return out;
}

std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

/// Distance to the next byte that could start a magic sequence.
std::size_t resync_distance(std::span<const std::uint8_t> buffer) {
  for (std::size_t i = 1; i < buffer.size(); ++i) {
    if (buffer[i] == kMagic[0]) return i;
  }
  return std::max<std::size_t>(buffer.size(), 1);
}

}  // namespace

std::vector<std::uint8_t> encode_payload(const Message& msg) {
  std::vector<std::uint8_t> out;
  Writer w(out);
  write_payload(msg, w);
  return out;
}

void append_frame(const Message& msg, std::vector<std::uint8_t>& out) {
  const std::size_t start = out.size();
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  Writer w(out);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(type_of(msg)));
  w.u32(0);  // patched below
  const std::size_t payload_start = out.size();
  try {
    write_payload(msg, w);
  } catch (...) {
    out.resize(start);
    throw;
  }
  const std::size_t len = out.size() - payload_start;
  if (len > kMaxPayload) {
    out.resize(start);
    throw EncodeError("payload exceeds 1 MiB");
  }
  for (int i = 0; i < 4; ++i) {
    out[payload_start - 4 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  }
  const auto crc = crc32(std::span(out).subspan(start + 4));
  w.u32(crc);
}

std::vector<std::uint8_t> encode_frame(const Message& msg) {
  std::vector<std::uint8_t> out;
  append_frame(msg, out);
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> buffer) {
  const std::size_t magic_avail = std::min<std::size_t>(buffer.size(), 4);
  if (!std::equal(buffer.begin(), buffer.begin() + magic_avail, std::begin(kMagic))) {
    return DecodeError{DecodeErrorKind::BadMagic, resync_distance(buffer)};
  }
  if (buffer.size() < kHeaderSize) return NeedMore{};

  const std::uint8_t version = buffer[4];
  const std::uint8_t type = buffer[5];
  const std::uint32_t len = load_u32(buffer.data() + 6);
  if (len > kMaxPayload) return DecodeError{DecodeErrorKind::BadLength, 1};

  const std::size_t total = kHeaderSize + len + kTrailerSize;
  if (buffer.size() < total) return NeedMore{};

  const auto covered = buffer.subspan(4, kHeaderSize - 4 + len);
  if (crc32(covered) != load_u32(buffer.data() + kHeaderSize + len)) {
    return DecodeError{DecodeErrorKind::Integrity, 1};
  }
  if (version != kVersion || !is_known_type(type)) {
    return DecodeError{DecodeErrorKind::Unsupported, total};
  }

  std::optional<Message> msg;
  try {
    msg = read_payload(static_cast<MsgType>(type), buffer.subspan(kHeaderSize, len));
  } catch (const Underflow&) {
    msg.reset();
  }
  if (!msg) return DecodeError{DecodeErrorKind::Malformed, total};
  return Decoded{std::move(*msg), total};
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  compact();
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameDecoder::next() {
  while (pos_ < buf_.size()) {
    auto result = decode_frame(std::span(buf_).subspan(pos_));
    if (auto* ok = std::get_if<Decoded>(&result)) {
      pos_ += ok->consumed;
      return std::move(ok->message);
    }
    if (std::holds_alternative<NeedMore>(result)) return std::nullopt;
    const auto& err = std::get<DecodeError>(result);
    ++errors_[static_cast<std::size_t>(err.kind)];
    pos_ += err.skip;
  }
  return std::nullopt;
}

std::uint64_t FrameDecoder::total_errors() const {
  std::uint64_t n = 0;
  for (auto e : errors_) n += e;
  return n;
}

void FrameDecoder::compact() {
  if (pos_ == 0) return;
  buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(std::min(pos_, buf_.size())));
  pos_ = 0;
}

}  // namespace vibedaq::proto
