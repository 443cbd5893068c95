#include <doctest.h>

#include <random>

#include "tactile/analyzer.hpp"
#include "tactile/errors.hpp"

using namespace tactile;

namespace {

// Collapse equal runs, then count interior runs higher than both neighbours.
std::size_t oracle_local_maxima(const std::vector<int>& x) {
  std::vector<int> runs;
  for (int v : x) {
    if (runs.empty() || runs.back() != v) runs.push_back(v);
  }
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < runs.size(); ++i) {
    if (runs[i] > runs[i - 1] && runs[i] > runs[i + 1]) ++n;
  }
  return n;
}

std::vector<CodeFrame> frames_for_channel(std::size_t channel, const std::vector<int>& codes) {
  std::vector<CodeFrame> out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    CodeFrame f;
    f.t_ms = static_cast<double>(i);
    f.codes[channel] = static_cast<Code>(codes[i]);
    out.push_back(f);
  }
  return out;
}

std::vector<std::uint64_t> totals(const std::vector<SegmentGroup>& letters) {
  std::vector<std::uint64_t> t;
  for (const auto& l : letters) {
    for (const auto& s : l) t.push_back(s.total_count);
  }
  return t;
}

}  // namespace

TEST_CASE("count peaks examples") {
  CHECK(count_peaks(std::vector<int>{0, 1, 2, 1, 0}) == 1);
  CHECK(count_peaks(std::vector<int>{0, 1, 0, 1, 0}) == 2);
  CHECK(count_peaks(std::vector<int>{0, 1, 1, 2, 2, 1}) == 1);
  CHECK(count_peaks(std::vector<int>{2, 1, 0}) == 0);
  CHECK(count_peaks(std::vector<int>{3}) == 0);
  CHECK_THROWS_AS(count_peaks(std::vector<int>{}), DomainError);
}

TEST_CASE("count peaks equals the local-maximum oracle on every length-6 code sequence") {
  std::vector<int> x(6);
  for (int m = 0; m < 4096; ++m) {
    for (int i = 0, v = m; i < 6; ++i, v /= 4) x[i] = v % 4;
    REQUIRE(count_peaks(x) == oracle_local_maxima(x));
  }
}

TEST_CASE("count peaks on random sequences: oracle, shift invariance, concatenation bound") {
  std::mt19937 gen(17);
  std::uniform_int_distribution<int> code(0, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<int> a(30), b(1 + trial % 29);
    for (int& v : a) v = code(gen);
    for (int& v : b) v = code(gen);
    REQUIRE(count_peaks(a) == oracle_local_maxima(a));

    std::vector<int> shifted = a;
    for (int& v : shifted) v += 5;
    CHECK(count_peaks(shifted) == count_peaks(a));

    std::vector<int> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto sum = count_peaks(a) + count_peaks(b);
    CHECK(count_peaks(ab) >= sum);
    CHECK(count_peaks(ab) <= sum + 1);
  }
}

TEST_CASE("window reduce") {
  SUBCASE("all zero") {
    const auto r = window_reduce(frames_for_channel(0, std::vector<int>(30, 0)), 30, 0, 0.0);
    CHECK(r.max == Codes{});
    CHECK(r.total_peaks() == 0);
    CHECK_FALSE(r.active);
  }
  SUBCASE("one channel ramps up and down once") {
    std::vector<int> codes(30, 0);
    for (int i = 0; i < 7; ++i) codes[5 + i] = std::vector<int>{1, 2, 3, 3, 2, 1, 0}[i];
    const auto r = window_reduce(frames_for_channel(4, codes), 30, 2, 800.0);
    CHECK(r.max[4] == 3);
    CHECK(r.peaks[4] == 1);
    CHECK(r.total_peaks() == 1);
    CHECK(r.active);
    CHECK(r.window_idx == 2);
    CHECK(r.t_start_ms == 800.0);
  }
  SUBCASE("constant code") {
    const auto r = window_reduce(frames_for_channel(1, std::vector<int>(30, 2)), 30, 0, 0.0);
    CHECK(r.max[1] == 2);
    CHECK(r.peaks[1] == 0);
    CHECK(r.active);
  }
  SUBCASE("wrong frame count") {
    CHECK_THROWS_AS(window_reduce(frames_for_channel(0, std::vector<int>(29, 0)), 30, 0, 0.0), ContractError);
  }
}

TEST_CASE("segment stream examples") {
  const std::vector<std::uint64_t> counts{3, 4, 0, 0, 5, 0, 0, 0, 0};
  const auto letters = segment_stream(counts, 2, 4);
  REQUIRE(letters.size() == 1);
  REQUIRE(letters[0].size() == 2);
  CHECK(letters[0][0] == Segment{0, 1, 7});
  CHECK(letters[0][1] == Segment{4, 4, 5});

  CHECK(segment_stream(std::vector<std::uint64_t>(10, 0), 1, 3).empty());

  const auto open = segment_stream(std::vector<std::uint64_t>{2, 3, 2}, 1, 3);
  REQUIRE(open.size() == 1);
  REQUIRE(open[0].size() == 1);
  CHECK(open[0][0].total_count == 7);
}

TEST_CASE("incremental segmenter agrees with the batch form") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::uint64_t> counts(60);
    for (auto& c : counts) c = gen() % 3 == 0 ? 0 : gen() % 4;
    Segmenter seg(1, 3);
    std::vector<SegmentGroup> letters;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (auto ev = seg.push(i, counts[i]); ev.letter_closed) letters.push_back(*ev.letter_closed);
    }
    if (auto ev = seg.finish(); ev.letter_closed) letters.push_back(*ev.letter_closed);
    REQUIRE(letters == segment_stream(counts, 1, 3));
  }
}

TEST_CASE("segment totals survive a one-window phase shift when gaps are wide") {
  std::mt19937 gen(29);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::uint64_t> counts;
    for (int seg = 0; seg < 5; ++seg) {
      const int len = 1 + static_cast<int>(gen() % 5);
      for (int i = 0; i < len; ++i) counts.push_back(1 + gen() % 3);
      const int gap = 2 + static_cast<int>(gen() % 4);
      for (int i = 0; i < gap; ++i) counts.push_back(0);
    }
    std::vector<std::uint64_t> later{0};
    later.insert(later.end(), counts.begin(), counts.end());
    CHECK(totals(segment_stream(counts, 1, 3)) == totals(segment_stream(later, 1, 3)));
  }
}

TEST_CASE("classify segment") {
  CHECK(classify_segment(5) == SegmentClass::Dot);
  CHECK(classify_segment(0) == SegmentClass::Dot);
  CHECK(classify_segment(9) == SegmentClass::Dot);
  CHECK(classify_segment(10) == SegmentClass::Dash);
  CHECK(classify_segment(15) == SegmentClass::Dash);
  CHECK(classify_segment(19) == SegmentClass::Dash);
  CHECK(classify_segment(20) == SegmentClass::Continuous);
  CHECK(classify_segment(25) == SegmentClass::Continuous);
}

TEST_CASE("analyzer config") {
  AnalyzerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.gap_windows = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.letter_gap_windows = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  WindowReport r;
  r.peaks = {1, 0, 4, 0, 0, 0, 0, 0, 2};
  cfg = {};
  CHECK(cfg.pooled(r) == 4);
  cfg.pooling = Pooling::Sum;
  CHECK(cfg.pooled(r) == 7);
}

TEST_CASE("window accumulator") {
  WindowAccumulator acc(30, 400.0);
  std::vector<WindowReport> out;
  for (int i = 0; i < 95; ++i) {
    CodeFrame f;
    f.codes[0] = static_cast<Code>(i % 2);
    if (auto r = acc.push(f)) out.push_back(*r);
  }
  REQUIRE(out.size() == 3);
  CHECK(out[2].window_idx == 2);
  CHECK(out[2].t_start_ms == 800.0);
  CHECK(acc.buffered() == 5);
  CHECK(out[0].peaks[0] == 14);
}
