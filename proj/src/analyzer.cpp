#include "tactile/analyzer.hpp"

#include <algorithm>
#include <numeric>

namespace tactile {

std::uint32_t WindowReport::total_peaks() const noexcept {
  return std::accumulate(peaks.begin(), peaks.end(), std::uint32_t{0});
}

std::uint32_t WindowReport::max_peaks() const noexcept {
  return *std::max_element(peaks.begin(), peaks.end());
}

WindowReport window_reduce(std::span<const CodeFrame> frames, std::size_t expected_frames,
                           std::size_t window_idx, double t_start_ms) {
  if (frames.size() != expected_frames) {
    throw ContractError("window " + std::to_string(window_idx) + " has " +
                        std::to_string(frames.size()) + " frames, expected " +
                        std::to_string(expected_frames));
  }
  WindowReport r;
  r.window_idx = window_idx;
  r.t_start_ms = t_start_ms;
  std::vector<Code> series(frames.size());
  for (std::size_t c = 0; c < kChannels; ++c) {
    for (std::size_t i = 0; i < frames.size(); ++i) series[i] = frames[i].codes[c];
    r.max[c] = *std::max_element(series.begin(), series.end());
    r.peaks[c] = static_cast<std::uint32_t>(count_peaks(series));
    r.active = r.active || r.max[c] > 0;
  }
  return r;
}

void AnalyzerConfig::validate() const {
  if (gap_windows < 1) throw ConfigError("analyzer gap_windows must be >= 1");
  if (letter_gap_windows <= gap_windows) {
    throw ConfigError("analyzer letter_gap_windows must exceed gap_windows");
  }
}

std::uint32_t AnalyzerConfig::pooled(const WindowReport& r) const noexcept {
  return pooling == Pooling::Max ? r.max_peaks() : r.total_peaks();
}

std::string_view to_string(SegmentClass c) noexcept {
  switch (c) {
    case SegmentClass::Dot: return "dot";
    case SegmentClass::Dash: return "dash";
    case SegmentClass::Continuous: return "continuous";
  }
  return "?";
}

SegmentClass classify_segment(std::uint64_t total_count) noexcept {
  if (total_count < 10) return SegmentClass::Dot;
  if (total_count < 20) return SegmentClass::Dash;
  return SegmentClass::Continuous;
}

Segmenter::Segmenter(std::size_t gap_windows, std::size_t letter_gap_windows)
    : gap_(gap_windows), letter_gap_(letter_gap_windows) {
  AnalyzerConfig{gap_windows, letter_gap_windows}.validate();
}

Segmenter::Events Segmenter::push(std::size_t window_idx, std::uint64_t count) {
  Events ev;
  if (count > 0) {
    zero_run_ = 0;
    if (!open_) open_ = Segment{window_idx, window_idx, 0};
    open_->end_window = window_idx;
    open_->total_count += count;
    return ev;
  }
  ++zero_run_;
  if (open_ && zero_run_ >= gap_) {
    letter_.push_back(*open_);
    ev.segment_closed = *open_;
    open_.reset();
  }
  if (!open_ && !letter_.empty() && zero_run_ >= letter_gap_) {
    ev.letter_closed = std::move(letter_);
    letter_.clear();
  }
  return ev;
}

Segmenter::Events Segmenter::finish() {
  Events ev;
  if (open_) {
    letter_.push_back(*open_);
    ev.segment_closed = *open_;
    open_.reset();
  }
  if (!letter_.empty()) {
    ev.letter_closed = std::move(letter_);
    letter_.clear();
  }
  zero_run_ = 0;
  return ev;
}

std::vector<SegmentGroup> segment_stream(std::span<const std::uint64_t> counts,
                                         std::size_t gap_windows,
                                         std::size_t letter_gap_windows) {
  Segmenter seg(gap_windows, letter_gap_windows);
  std::vector<SegmentGroup> letters;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    auto ev = seg.push(i, counts[i]);
    if (ev.letter_closed) letters.push_back(std::move(*ev.letter_closed));
  }
  auto ev = seg.finish();
  if (ev.letter_closed) letters.push_back(std::move(*ev.letter_closed));
  return letters;
}

WindowAccumulator::WindowAccumulator(std::size_t frames_per_window, double window_ms)
    : n_(frames_per_window), window_ms_(window_ms) {
  if (n_ == 0) throw ConfigError("window must hold at least one frame");
  buf_.reserve(n_);
}

std::optional<WindowReport> WindowAccumulator::push(const CodeFrame& frame) {
  buf_.push_back(frame);
  if (buf_.size() < n_) return std::nullopt;
  auto r = window_reduce(buf_, n_, next_idx_, static_cast<double>(next_idx_) * window_ms_);
  ++next_idx_;
  buf_.clear();
  return r;
}

}  // namespace tactile
