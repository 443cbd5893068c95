#include "tactile/quantizer.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tactile/errors.hpp"

namespace tactile {

void ThresholdBank::validate() const {
  if (!(k_iv > 0.0)) throw ConfigError("quantizer k_iv must be positive");
  if (!(0.0 < theta[0] && theta[0] < theta[1] && theta[1] < theta[2])) {
    throw ConfigError("quantizer thresholds must satisfy 0 < theta1 < theta2 < theta3");
  }
  if (!(sample_period_ms > 0.0)) throw ConfigError("quantizer sample_period_ms must be positive");
}

ComparatorBits comparator_bits(double x, const ThresholdBank& bank) noexcept {
  return {x >= bank.theta[0], x >= bank.theta[1], x >= bank.theta[2]};
}

Code code_from_bits(const ComparatorBits& b) {
  if (!b.monotone()) {
    throw IntegrityError("non-monotone comparator triple (" + std::to_string(b.v1) + "," +
                         std::to_string(b.v2) + "," + std::to_string(b.v3) + ")");
  }
  const bool bit0 = (b.v1 != b.v2) || b.v3;
  const bool bit1 = b.v2 || b.v3;
  return static_cast<Code>((bit1 ? 2 : 0) | (bit0 ? 1 : 0));
}

Codes quantize(std::span<const double, kChannels> currents, const ThresholdBank& bank) {
  Codes out{};
  for (std::size_t c = 0; c < kChannels; ++c) {
    out[c] = code_from_bits(comparator_bits(bank.k_iv * currents[c], bank));
  }
  return out;
}

void write_codes_csv(std::ostream& out, const std::vector<CodeFrame>& frames) {
  out << "t_ms";
  for (std::size_t c = 0; c < kChannels; ++c) out << ",c" << c;
  out << '\n';
  out.precision(10);
  for (const auto& f : frames) {
    out << f.t_ms;
    for (Code code : f.codes) out << ',' << static_cast<int>(code);
    out << '\n';
  }
}

std::vector<CodeFrame> read_codes_csv(std::istream& in) {
  std::vector<CodeFrame> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("t_ms", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError("code CSV line " + std::to_string(lineno) + ": bad number '" + cell +
                          "'");
      }
    }
    if (values.size() != kChannels + 1) {
      throw FormatError("code CSV line " + std::to_string(lineno) + ": expected 10 columns");
    }
    CodeFrame f;
    f.t_ms = values[0];
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double v = values[c + 1];
      if (v != 0.0 && v != 1.0 && v != 2.0 && v != 3.0) {
        throw FormatError("code CSV line " + std::to_string(lineno) + ": code out of range 0..3");
      }
      f.codes[c] = static_cast<Code>(v);
    }
    frames.push_back(f);
  }
  return frames;
}

}  // namespace tactile
