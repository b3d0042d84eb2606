#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

namespace vibedaq::bus {

// Accelerometer register map (LSM6DS3TR-C subset; gyro and FIFO banks are
// not modelled).
namespace reg {
inline constexpr std::uint8_t WHO_AM_I = 0x0F;
inline constexpr std::uint8_t CTRL1_XL = 0x10;
inline constexpr std::uint8_t CTRL3_C = 0x12;
inline constexpr std::uint8_t CTRL10_C = 0x19;
inline constexpr std::uint8_t STATUS_REG = 0x1E;
inline constexpr std::uint8_t OUTX_L_XL = 0x28;
inline constexpr std::uint8_t OUTZ_H_XL = 0x2D;
}  // namespace reg

inline constexpr std::uint8_t kImuAddress = 0x6A;
inline constexpr std::uint8_t kWhoAmIValue = 0x6A;

/// CTRL1_XL value for a supported rate/range, or nullopt if unsupported.
std::optional<std::uint8_t> ctrl1_xl_code(std::uint32_t odr_mhz, int range_g);
/// Decodes the ODR field of CTRL1_XL; 0 means power-down.
std::uint32_t odr_from_ctrl1(std::uint8_t ctrl1);
int range_from_ctrl1(std::uint8_t ctrl1);

enum class RegisterAccess { Ok, Unmapped, ReadOnly };

class ImuDevice {
 public:
  explicit ImuDevice(std::uint8_t address = kImuAddress);

  std::uint8_t address() const { return address_; }

  /// Copies registers [start, start + out.size()) into out.
  RegisterAccess read(std::uint8_t start, std::span<std::uint8_t> out);
  RegisterAccess write(std::uint8_t reg, std::uint8_t value);

  std::uint32_t odr_mhz() const { return odr_from_ctrl1(regs_[reg::CTRL1_XL]); }
  int range_g() const { return range_from_ctrl1(regs_[reg::CTRL1_XL]); }

  /// Quantises a sample in g at the configured full scale and latches it
  /// into the output registers. Clipped axes bump the saturation counter.
  void latch_g(const std::array<double, 3>& g);
  void latch_raw(const std::array<std::int16_t, 3>& raw);

  std::array<std::int16_t, 3> output_raw() const;
  std::uint64_t saturation_count() const { return saturations_; }

  static bool is_mapped(std::uint8_t r);
  static bool is_writable(std::uint8_t r);

 private:
  std::uint8_t address_;
  std::array<std::uint8_t, 256> regs_{};
  std::uint64_t saturations_ = 0;
};

}  // namespace vibedaq::bus
