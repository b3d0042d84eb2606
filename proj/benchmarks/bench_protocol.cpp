#include <benchmark/benchmark.h>

#include <vector>

#include "vibedaq/protocol/frame.hpp"

namespace {

using namespace vibedaq;

proto::DataBatch batch(std::size_t n) {
  proto::DataBatch b;
  b.slave_id = 1;
  b.mux_channel = 2;
  b.seq_first = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    b.records.push_back({4808 * i, static_cast<std::int16_t>(i), -1, 16384});
  }
  return b;
}

void BM_EncodeBatch(benchmark::State& state) {
  const proto::Message m = batch(static_cast<std::size_t>(state.range(0)));
  std::vector<std::uint8_t> out;
  for (auto _ : state) {
    out.clear();
    proto::append_frame(m, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}
BENCHMARK(BM_EncodeBatch)->Arg(1)->Arg(64);

void BM_DecodeBatch(benchmark::State& state) {
  const auto bytes = proto::encode_frame(batch(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(proto::decode_frame(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_DecodeBatch)->Arg(1)->Arg(64);

void BM_StreamDecode(benchmark::State& state) {
  std::vector<std::uint8_t> bytes;
  for (int i = 0; i < 100; ++i) proto::append_frame(batch(64), bytes);
  for (auto _ : state) {
    proto::FrameDecoder dec;
    dec.feed(bytes);
    std::size_t n = 0;
    while (dec.next()) ++n;
    benchmark::DoNotOptimize(n);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_StreamDecode);

}  // namespace
