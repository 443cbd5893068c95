#include "tactile/morse.hpp"

#include "tactile/errors.hpp"

namespace tactile {

MorseTable::MorseTable()
    : entries_{{"-.", 'N'}, {"..", 'I'}, {"--", 'M'}, {"-", 'T'}, {".", 'E'}} {}

std::optional<char> MorseTable::lookup(const std::string& code) const {
  auto it = entries_.find(code);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> MorseTable::code_for(char letter) const {
  for (const auto& [code, l] : entries_) {
    if (l == letter) return code;
  }
  return std::nullopt;
}

std::string morse_string(std::span<const SegmentClass> symbols) {
  std::string s;
  for (auto c : symbols) {
    switch (c) {
      case SegmentClass::Dot: s += '.'; break;
      case SegmentClass::Dash: s += '-'; break;
      case SegmentClass::Continuous: s += '~'; break;
    }
  }
  return s;
}

std::optional<char> decode_morse(std::span<const SegmentClass> symbols, const MorseTable& table) {
  for (auto c : symbols) {
    if (c == SegmentClass::Continuous) {
      throw RoutingError("continuous segment routed to Morse decoding");
    }
  }
  return table.lookup(morse_string(symbols));
}

}  // namespace tactile
