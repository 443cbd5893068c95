#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tactile/sensor.hpp"

namespace tactile {

using Code = std::uint8_t;  // 0..3
using Codes = std::array<Code, kChannels>;

struct ThresholdBank {
  double k_iv = 5e5;                          // V/A; 5 V at the default I_on
  std::array<double, 3> theta{2.0, 3.0, 3.5};  // comparator references, V
  double sample_period_ms = 40.0 / 3.0;

  void validate() const;
};

struct ComparatorBits {
  bool v1 = false;
  bool v2 = false;
  bool v3 = false;

  bool monotone() const noexcept { return (!v3 || v2) && (!v2 || v1); }
};

struct CodeFrame {
  double t_ms = 0.0;
  Codes codes{};
};

ComparatorBits comparator_bits(double x_volts, const ThresholdBank& bank) noexcept;

// bit[0] = (V1 XOR V2) OR V3, bit[1] = V2 OR V3. Throws IntegrityError on a
// triple no ordered comparator bank can produce.
Code code_from_bits(const ComparatorBits& bits);

Codes quantize(std::span<const double, kChannels> currents, const ThresholdBank& bank);

// t_ms,c0,...,c8
void write_codes_csv(std::ostream& out, const std::vector<CodeFrame>& frames);
std::vector<CodeFrame> read_codes_csv(std::istream& in);

}  // namespace tactile
