#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "tactile/analyzer.hpp"
#include "tactile/mlp.hpp"

namespace tactile {

enum class SymbolClass : std::uint8_t { Plus = 0, Minus = 1, Times = 2, Divide = 3 };

inline constexpr std::size_t kSymbolClasses = 4;
inline constexpr std::array<SymbolClass, kSymbolClasses> kAllSymbols{
    SymbolClass::Plus, SymbolClass::Minus, SymbolClass::Times, SymbolClass::Divide};

std::string_view to_string(SymbolClass s) noexcept;
SymbolClass symbol_from_string(std::string_view name);

// Row-major cells pressed by each mold.
//   plus {1,3,4,5,7}  minus {3,4,5}  times {0,2,4,6,8}  divide {2,4,6}
std::array<bool, kChannels> symbol_mask(SymbolClass s) noexcept;

using Feature = std::array<double, kChannels>;

// Per channel, the highest code seen during the press scaled to [0, 1].
Feature featurize(std::span<const WindowReport> reports);

struct SymbolSample {
  Feature feature{};
  SymbolClass label = SymbolClass::Plus;
};

struct SymbolDataset {
  std::vector<SymbolSample> samples;
  std::uint64_t seed = 0;
  double noise = 1.0;
};

std::vector<LabeledVector> to_labeled(std::span<const SymbolSample> samples);

// Seeded shuffle then split; the first part holds round(fraction * n) samples.
void split_dataset(std::span<const SymbolSample> samples, double train_fraction, std::uint64_t seed,
                   std::vector<SymbolSample>& train, std::vector<SymbolSample>& test);

// label,f0,...,f8
void write_dataset_csv(std::ostream& out, std::span<const SymbolSample> samples);
std::vector<SymbolSample> read_dataset_csv(std::istream& in);

}  // namespace tactile
