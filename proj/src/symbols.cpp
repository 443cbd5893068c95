#include "tactile/symbols.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tactile/errors.hpp"
#include "tactile/rng.hpp"

namespace tactile {

std::string_view to_string(SymbolClass s) noexcept {
  switch (s) {
    case SymbolClass::Plus: return "plus";
    case SymbolClass::Minus: return "minus";
    case SymbolClass::Times: return "times";
    case SymbolClass::Divide: return "divide";
  }
  return "?";
}

SymbolClass symbol_from_string(std::string_view name) {
  for (auto s : kAllSymbols) {
    if (to_string(s) == name) return s;
  }
  throw FormatError("unknown symbol class '" + std::string(name) + "'");
}

std::array<bool, kChannels> symbol_mask(SymbolClass s) noexcept {
  switch (s) {
    case SymbolClass::Plus: return {false, true, false, true, true, true, false, true, false};
    case SymbolClass::Minus: return {false, false, false, true, true, true, false, false, false};
    case SymbolClass::Times: return {true, false, true, false, true, false, true, false, true};
    case SymbolClass::Divide: return {false, false, true, false, true, false, true, false, false};
  }
  return {};
}

Feature featurize(std::span<const WindowReport> reports) {
  Feature f{};
  bool any_active = false;
  for (const auto& r : reports) {
    if (!r.active) continue;
    any_active = true;
    for (std::size_t c = 0; c < kChannels; ++c) {
      f[c] = std::max(f[c], static_cast<double>(r.max[c]) / 3.0);
    }
  }
  if (!any_active) throw DomainError("featurize needs at least one active window");
  return f;
}

std::vector<LabeledVector> to_labeled(std::span<const SymbolSample> samples) {
  std::vector<LabeledVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back({std::vector<double>(s.feature.begin(), s.feature.end()),
                   static_cast<std::size_t>(s.label)});
  }
  return out;
}

void split_dataset(std::span<const SymbolSample> samples, double train_fraction, std::uint64_t seed,
                   std::vector<SymbolSample>& train, std::vector<SymbolSample>& test) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  std::vector<SymbolSample> shuffled(samples.begin(), samples.end());
  Rng rng(seed);
  rng.shuffle(shuffled);
  const auto n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(shuffled.size())));
  train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
}

void write_dataset_csv(std::ostream& out, std::span<const SymbolSample> samples) {
  out << "label";
  for (std::size_t c = 0; c < kChannels; ++c) out << ",f" << c;
  out << '\n';
  out.precision(17);
  for (const auto& s : samples) {
    out << to_string(s.label);
    for (double v : s.feature) out << ',' << v;
    out << '\n';
  }
}

std::vector<SymbolSample> read_dataset_csv(std::istream& in) {
  std::vector<SymbolSample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("label", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    SymbolSample s;
    s.label = symbol_from_string(cell);
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= kChannels) throw FormatError("dataset line " + std::to_string(lineno) + ": too many columns");
      try {
        s.feature[c++] = std::stod(cell);
      } catch (const std::exception&) {
        throw FormatError("dataset line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (c != kChannels) throw FormatError("dataset line " + std::to_string(lineno) + ": too few columns");
    for (double v : s.feature) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw FormatError("dataset line " + std::to_string(lineno) + ": feature outside [0, 1]");
      }
    }
    samples.push_back(s);
  }
  return samples;
}

}  // namespace tactile
