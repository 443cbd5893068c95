#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tactile/errors.hpp"
#include "tactile/quantizer.hpp"

namespace tactile {

// Counts rise-then-fall pairs over adjacent differences. A positive difference
// arms the detector, the first negative difference while armed counts one
// peak and disarms it, and zero differences leave the state alone.
template <std::integral T>
std::size_t count_peaks(std::span<const T> values) {
  if (values.empty()) throw DomainError("count_peaks needs at least one value");
  std::size_t peaks = 0;
  bool rising = false;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1]) {
      rising = true;
    } else if (values[i] < values[i - 1] && rising) {
      ++peaks;
      rising = false;
    }
  }
  return peaks;
}

template <std::integral T>
std::size_t count_peaks(const std::vector<T>& values) {
  return count_peaks(std::span<const T>(values));
}

struct WindowReport {
  std::size_t window_idx = 0;
  double t_start_ms = 0.0;
  Codes max{};
  std::array<std::uint32_t, kChannels> peaks{};
  bool active = false;

  std::uint32_t total_peaks() const noexcept;
  std::uint32_t max_peaks() const noexcept;
};

WindowReport window_reduce(std::span<const CodeFrame> frames, std::size_t expected_frames,
                           std::size_t window_idx, double t_start_ms);

enum class Pooling { Max, Sum };

struct AnalyzerConfig {
  std::size_t gap_windows = 1;         // silent windows that end a segment
  std::size_t letter_gap_windows = 3;  // silent windows that end a letter
  Pooling pooling = Pooling::Max;      // how channel peak counts combine per window

  void validate() const;
  std::uint32_t pooled(const WindowReport& r) const noexcept;
};

struct Segment {
  std::size_t start_window = 0;
  std::size_t end_window = 0;
  std::uint64_t total_count = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

using SegmentGroup = std::vector<Segment>;

enum class SegmentClass { Dot, Dash, Continuous };

std::string_view to_string(SegmentClass c) noexcept;

// [0, 10) dot, [10, 20) dash, 20 and above continuous.
SegmentClass classify_segment(std::uint64_t total_count) noexcept;

// Incremental gap segmentation over per-window peak counts.
class Segmenter {
 public:
  struct Events {
    std::optional<Segment> segment_closed;
    std::optional<SegmentGroup> letter_closed;
  };

  explicit Segmenter(std::size_t gap_windows, std::size_t letter_gap_windows);

  Events push(std::size_t window_idx, std::uint64_t count);
  Events finish();

  bool segment_open() const noexcept { return open_.has_value(); }
  bool letter_open() const noexcept { return !letter_.empty() || open_.has_value(); }

 private:
  std::size_t gap_;
  std::size_t letter_gap_;
  std::size_t zero_run_ = 0;
  std::optional<Segment> open_;
  SegmentGroup letter_;
};

std::vector<SegmentGroup> segment_stream(std::span<const std::uint64_t> counts,
                                         std::size_t gap_windows,
                                         std::size_t letter_gap_windows);

// Groups decoded code frames into fixed windows of N frames.
class WindowAccumulator {
 public:
  WindowAccumulator(std::size_t frames_per_window, double window_ms);

  std::optional<WindowReport> push(const CodeFrame& frame);
  std::size_t buffered() const noexcept { return buf_.size(); }
  std::size_t windows_emitted() const noexcept { return next_idx_; }

 private:
  std::size_t n_;
  double window_ms_;
  std::size_t next_idx_ = 0;
  std::vector<CodeFrame> buf_;
};

}  // namespace tactile
