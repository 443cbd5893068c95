#include "tactile/wire.hpp"

#include <cmath>
#include <cstdio>

#include "tactile/errors.hpp"

namespace tactile {

Payload18::Payload18(std::uint32_t value) : value_(value) {
  if (value >= kLimit) {
    throw DomainError("payload " + std::to_string(value) + " does not fit in 18 bits");
  }
}

std::uint32_t WireUnit::to_word() const noexcept {
  std::uint32_t w = 0;
  for (std::size_t i = 0; i < kUnitBits; ++i) {
    if (bits[i]) w |= 1u << (kUnitBits - 1 - i);
  }
  return w;
}

WireUnit WireUnit::from_word(std::uint32_t word) noexcept {
  WireUnit u;
  for (std::size_t i = 0; i < kUnitBits; ++i) u.bits[i] = (word >> (kUnitBits - 1 - i)) & 1u;
  return u;
}

std::string WireUnit::hex() const {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08X", static_cast<unsigned>(to_word()));
  return buf;
}

WireUnit WireUnit::from_hex(const std::string& hex) {
  if (hex.size() != 8) throw FormatError("wire unit hex must be 8 digits: '" + hex + "'");
  std::uint32_t w = 0;
  for (char ch : hex) {
    int d;
    if (ch >= '0' && ch <= '9') d = ch - '0';
    else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
    else throw FormatError("bad hex digit in wire unit '" + hex + "'");
    w = (w << 4) | static_cast<std::uint32_t>(d);
  }
  return from_word(w);
}

void CodecConfig::validate() const {
  if (!(baud > 0.0)) throw ConfigError("codec baud must be positive");
  if (!(window_ms > 0.0)) throw ConfigError("codec window_ms must be positive");
  if (units_per_window() == 0) throw ConfigError("codec window holds no wire units");
}

std::size_t CodecConfig::units_per_window() const { return window_size(window_ms, baud); }

Payload18 pack(const Codes& codes) {
  std::uint32_t v = 0;
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (codes[c] > 3) {
      throw DomainError("code " + std::to_string(codes[c]) + " on channel " + std::to_string(c) +
                        " outside 0..3");
    }
    v |= static_cast<std::uint32_t>(codes[c]) << (2 * c);
  }
  return Payload18(v);
}

Codes unpack(Payload18 p) {
  Codes out{};
  for (std::size_t c = 0; c < kChannels; ++c) {
    out[c] = static_cast<Code>((p.value() >> (2 * c)) & 0x3u);
  }
  return out;
}

Codes unpack(std::uint32_t raw) { return unpack(Payload18(raw)); }

WireUnit to_wire(Payload18 p) {
  const std::uint8_t bytes[3] = {static_cast<std::uint8_t>((p.value() >> 16) & 0x03u),
                                 static_cast<std::uint8_t>((p.value() >> 8) & 0xFFu),
                                 static_cast<std::uint8_t>(p.value() & 0xFFu)};
  WireUnit u;
  for (std::size_t f = 0; f < 3; ++f) {
    const std::size_t base = f * kFrameBits;
    u.bits[base] = false;
    for (std::size_t b = 0; b < 8; ++b) u.bits[base + 1 + b] = (bytes[f] >> b) & 1u;
    u.bits[base + 9] = true;
  }
  u.bits[kIdleOffset] = true;
  u.bits[kIdleOffset + 1] = true;
  return u;
}

Payload18 from_wire(const WireUnit& u) {
  std::uint32_t bytes[3] = {0, 0, 0};
  for (std::size_t f = 0; f < 3; ++f) {
    const std::size_t base = f * kFrameBits;
    if (u.bits[base]) throw FramingError("start bit not low", base);
    if (!u.bits[base + 9]) throw FramingError("stop bit not high", base + 9);
    for (std::size_t b = 0; b < 8; ++b) {
      if (u.bits[base + 1 + b]) bytes[f] |= 1u << b;
    }
  }
  for (std::size_t i = kIdleOffset; i < kUnitBits; ++i) {
    if (!u.bits[i]) throw FramingError("idle bit not high", i);
  }
  if (bytes[0] & ~0x03u) throw IntegrityError("pad bits above the 18-bit payload are set");
  return Payload18((bytes[0] << 16) | (bytes[1] << 8) | bytes[2]);
}

std::size_t window_size(double window_ms, double baud) {
  if (!(window_ms > 0.0) || !(baud > 0.0)) {
    throw DomainError("window size needs positive window and baud");
  }
  return static_cast<std::size_t>(std::floor(window_ms * baud / (1000.0 * kUnitBits) + 1e-9));
}

void WireStreamDecoder::feed(std::span<const std::uint8_t> bits) {
  for (auto b : bits) {
    if (b > 1) throw FormatError("bit stream element is not 0 or 1");
    bits_.push_back(b);
  }
}

void WireStreamDecoder::feed(const WireUnit& unit) {
  for (std::size_t i = 0; i < kUnitBits; ++i) bits_.push_back(unit.bits[i] ? 1 : 0);
}

std::optional<Payload18> WireStreamDecoder::next() {
  if (bits_.size() < kUnitBits) return std::nullopt;
  WireUnit u;
  for (std::size_t i = 0; i < kUnitBits; ++i) u.bits[i] = bits_[i] != 0;
  bits_.erase(bits_.begin(), bits_.begin() + kUnitBits);
  const std::size_t at = consumed_;
  consumed_ += kUnitBits;
  try {
    return from_wire(u);
  } catch (const FramingError& e) {
    throw FramingError("wire stream framing error", at + e.bit_offset());
  }
}

}  // namespace tactile
