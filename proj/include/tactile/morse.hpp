#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "tactile/analyzer.hpp"

namespace tactile {

class MorseTable {
 public:
  MorseTable();  // N I M T E
  explicit MorseTable(std::map<std::string, char> entries) : entries_(std::move(entries)) {}

  std::optional<char> lookup(const std::string& code) const;
  std::optional<std::string> code_for(char letter) const;
  const std::map<std::string, char>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, char> entries_;
};

std::string morse_string(std::span<const SegmentClass> symbols);

// Exact-match lookup; an unknown sequence yields nullopt. Continuous segments
// belong to trend reporting and raise RoutingError.
std::optional<char> decode_morse(std::span<const SegmentClass> symbols, const MorseTable& table);

}  // namespace tactile
