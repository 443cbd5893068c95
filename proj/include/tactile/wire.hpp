#pragma once

#include <bitset>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>

#include "tactile/quantizer.hpp"

namespace tactile {

// Nine 2-bit codes in one integer; channel c occupies bits [2c+1 : 2c].
class Payload18 {
 public:
  static constexpr std::uint32_t kLimit = 1u << 18;

  Payload18() = default;
  explicit Payload18(std::uint32_t value);

  std::uint32_t value() const noexcept { return value_; }
  friend bool operator==(Payload18, Payload18) = default;

 private:
  std::uint32_t value_ = 0;
};

// Serial layout of one payload, indexed by bit-time (index 0 goes out first):
// three 10-bit character frames (start 0, eight data bits LSB first, stop 1)
// carrying the payload big-endian, then two idle bit-times at 1.
inline constexpr std::size_t kFrameBits = 10;
inline constexpr std::size_t kUnitBits = 32;
inline constexpr std::size_t kIdleOffset = 30;

struct WireUnit {
  std::bitset<kUnitBits> bits;

  // Bit-time 0 in the most significant position.
  std::uint32_t to_word() const noexcept;
  static WireUnit from_word(std::uint32_t word) noexcept;
  std::string hex() const;
  static WireUnit from_hex(const std::string& hex);
  friend bool operator==(const WireUnit&, const WireUnit&) = default;
};

struct CodecConfig {
  double baud = 2400.0;
  double window_ms = 400.0;

  void validate() const;
  std::size_t units_per_window() const;
};

Payload18 pack(const Codes& codes);
Codes unpack(Payload18 p);
Codes unpack(std::uint32_t raw);

WireUnit to_wire(Payload18 p);
// Throws FramingError (with the offending bit offset) on a bad start, stop or
// idle bit, and IntegrityError when the six pad bits above the payload are set.
Payload18 from_wire(const WireUnit& unit);

// Units of 32 bit-times that fit in a window: floor(T * B / (1000 * 32)).
std::size_t window_size(double window_ms, double baud);

// Cursor over a received bit stream, one bit-time per element. Single owner.
class WireStreamDecoder {
 public:
  void feed(std::span<const std::uint8_t> bits);
  void feed(const WireUnit& unit);
  std::optional<Payload18> next();
  std::size_t pending_bits() const noexcept { return bits_.size(); }
  std::size_t consumed_bits() const noexcept { return consumed_; }

 private:
  std::deque<std::uint8_t> bits_;
  std::size_t consumed_ = 0;
};

}  // namespace tactile
