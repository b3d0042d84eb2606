#include "vibedaq/sensorbus/imu_device.hpp"

#include <algorithm>

#include "vibedaq/core/types.hpp"

namespace vibedaq::bus {

namespace {

// ODR_XL[3:0] occupies CTRL1_XL[7:4]; codes 1..7 map onto the supported rates.
constexpr std::array<std::uint32_t, 8> kOdrByCode{0,       12'500,  26'000,  52'000,
                                                  104'000, 208'000, 416'000, 833'000};
// FS_XL[1:0] occupies CTRL1_XL[3:2]: 00 = 2 g, 01 = 16 g, 10 = 4 g, 11 = 8 g.
constexpr std::array<int, 4> kRangeByCode{2, 16, 4, 8};

}  // namespace

std::optional<std::uint8_t> ctrl1_xl_code(std::uint32_t odr_mhz, int range_g) {
  const auto odr = std::find(kOdrByCode.begin() + 1, kOdrByCode.end(), odr_mhz);
  const auto fs = std::find(kRangeByCode.begin(), kRangeByCode.end(), range_g);
  if (odr == kOdrByCode.end() || fs == kRangeByCode.end()) return std::nullopt;
  const auto odr_code = static_cast<std::uint8_t>(odr - kOdrByCode.begin());
  const auto fs_code = static_cast<std::uint8_t>(fs - kRangeByCode.begin());
  return static_cast<std::uint8_t>((odr_code << 4) | (fs_code << 2));
}

std::uint32_t odr_from_ctrl1(std::uint8_t ctrl1) {
  const auto code = static_cast<std::size_t>(ctrl1 >> 4);
  return code < kOdrByCode.size() ? kOdrByCode[code] : 0;
}

int range_from_ctrl1(std::uint8_t ctrl1) { return kRangeByCode[(ctrl1 >> 2) & 0x3]; }

ImuDevice::ImuDevice(std::uint8_t address) : address_(address) {
  regs_[reg::WHO_AM_I] = kWhoAmIValue;
  regs_[reg::CTRL3_C] = 0x04;  // IF_INC: auto-increment on burst reads
}

bool ImuDevice::is_mapped(std::uint8_t r) {
  return r == reg::WHO_AM_I || (r >= reg::CTRL1_XL && r <= reg::CTRL10_C) ||
         r == reg::STATUS_REG || (r >= reg::OUTX_L_XL && r <= reg::OUTZ_H_XL);
}

bool ImuDevice::is_writable(std::uint8_t r) { return r >= reg::CTRL1_XL && r <= reg::CTRL10_C; }

RegisterAccess ImuDevice::read(std::uint8_t start, std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t r = start + i;
    if (r > 0xFF || !is_mapped(static_cast<std::uint8_t>(r))) return RegisterAccess::Unmapped;
  }
  std::copy_n(regs_.begin() + start, out.size(), out.begin());
  // XLDA clears once the output block has been read.
  if (start <= reg::OUTZ_H_XL && start + out.size() > reg::OUTX_L_XL) {
    regs_[reg::STATUS_REG] &= static_cast<std::uint8_t>(~0x01);
  }
  return RegisterAccess::Ok;
}

RegisterAccess ImuDevice::write(std::uint8_t r, std::uint8_t value) {
  if (!is_mapped(r)) return RegisterAccess::Unmapped;
  if (!is_writable(r)) return RegisterAccess::ReadOnly;
  regs_[r] = value;
  return RegisterAccess::Ok;
}

void ImuDevice::latch_g(const std::array<double, 3>& g) {
  std::array<std::int16_t, 3> raw{};
  const int range = range_g();
  for (std::size_t a = 0; a < 3; ++a) {
    const auto q = g_to_raw(g[a], range);
    raw[a] = q.raw;
    if (q.saturated) ++saturations_;
  }
  latch_raw(raw);
}

void ImuDevice::latch_raw(const std::array<std::int16_t, 3>& raw) {
  for (std::size_t a = 0; a < 3; ++a) {
    const auto u = static_cast<std::uint16_t>(raw[a]);
    regs_[reg::OUTX_L_XL + 2 * a] = static_cast<std::uint8_t>(u & 0xFF);
    regs_[reg::OUTX_L_XL + 2 * a + 1] = static_cast<std::uint8_t>(u >> 8);
  }
  regs_[reg::STATUS_REG] |= 0x01;
}

std::array<std::int16_t, 3> ImuDevice::output_raw() const {
  std::array<std::int16_t, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto lo = regs_[reg::OUTX_L_XL + 2 * a];
    const auto hi = regs_[reg::OUTX_L_XL + 2 * a + 1];
    out[a] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  return out;
}

}  // namespace vibedaq::bus
