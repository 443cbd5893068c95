#include <doctest.h>

#include <sstream>

#include "tactile/errors.hpp"
#include "tactile/quantizer.hpp"

using namespace tactile;

namespace {

// The logic-gate formulas exactly as quoted: bit0 = (V1 XOR V2) OR V3, bit1 = V2 OR V3.
int gate_formula(bool v1, bool v2, bool v3) {
  const int bit0 = ((v1 != v2) || v3) ? 1 : 0;
  const int bit1 = (v2 || v3) ? 1 : 0;
  return bit0 | (bit1 << 1);
}

}  // namespace

TEST_CASE("comparator bits") {
  ThresholdBank bank;
  auto bits = [&](double x) {
    const auto b = comparator_bits(x, bank);
    return std::array<bool, 3>{b.v1, b.v2, b.v3};
  };
  CHECK(bits(bank.theta[0] - 0.01) == std::array<bool, 3>{false, false, false});
  CHECK(bits(bank.theta[1]) == std::array<bool, 3>{true, true, false});
  CHECK(bits(bank.theta[2] - 0.01) == std::array<bool, 3>{true, true, false});
  CHECK(bits(bank.theta[2]) == std::array<bool, 3>{true, true, true});
}

TEST_CASE("code from bits on the monotone triples") {
  CHECK(code_from_bits({false, false, false}) == 0);
  CHECK(code_from_bits({true, false, false}) == 1);
  CHECK(code_from_bits({true, true, false}) == 2);
  CHECK(code_from_bits({true, true, true}) == 3);
}

TEST_CASE("code from bits agrees with the gate formulas and rejects non-monotone triples") {
  int rejected = 0;
  for (int m = 0; m < 8; ++m) {
    const ComparatorBits b{bool(m & 1), bool(m & 2), bool(m & 4)};
    if (b.monotone()) {
      const int crossed = int(b.v1) + int(b.v2) + int(b.v3);
      CHECK(code_from_bits(b) == gate_formula(b.v1, b.v2, b.v3));
      CHECK(code_from_bits(b) == crossed);
    } else {
      CHECK_THROWS_AS(code_from_bits(b), IntegrityError);
      ++rejected;
    }
  }
  CHECK(rejected == 4);
}

TEST_CASE("quantize") {
  ThresholdBank bank;
  std::array<double, kChannels> amps{};
  amps.fill(1e-9);
  CHECK(quantize(amps, bank) == Codes{});

  amps[3] = (bank.theta[0] + bank.theta[1]) / 2.0 / bank.k_iv;
  auto codes = quantize(amps, bank);
  CHECK(codes[3] == 1);
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (c != 3) CHECK(codes[c] == 0);
  }

  amps.fill(1e-5);
  codes = quantize(amps, bank);
  for (auto c : codes) CHECK(c == 3);
}

TEST_CASE("quantization is monotone in the input") {
  ThresholdBank bank;
  int prev = 0;
  for (double x = 0.0; x <= 5.0; x += 0.001) {
    const int code = code_from_bits(comparator_bits(x, bank));
    CHECK(code >= prev);
    prev = code;
  }
  CHECK(prev == 3);
}

TEST_CASE("threshold bank validation") {
  ThresholdBank bank;
  bank.theta = {1.0, 1.0, 2.0};
  CHECK_THROWS_AS(bank.validate(), ConfigError);
  bank.theta = {0.0, 1.0, 2.0};
  CHECK_THROWS_AS(bank.validate(), ConfigError);
  bank = {};
  bank.k_iv = 0.0;
  CHECK_THROWS_AS(bank.validate(), ConfigError);
}

TEST_CASE("codes CSV round trip") {
  std::vector<CodeFrame> frames{{0.0, {0, 1, 2, 3, 0, 1, 2, 3, 0}}, {13.0, {3, 3, 3, 3, 3, 3, 3, 3, 3}}};
  std::stringstream ss;
  write_codes_csv(ss, frames);
  CHECK(ss.str().rfind("t_ms,c0,c1,c2,c3,c4,c5,c6,c7,c8\n", 0) == 0);
  const auto back = read_codes_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].codes == frames[0].codes);
  CHECK(back[1].t_ms == 13.0);

  std::stringstream bad("t_ms,c0,c1,c2,c3,c4,c5,c6,c7,c8\n0,4,0,0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_codes_csv(bad), FormatError);
}
