#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tactile/config.hpp"

namespace tactile {

struct FrequencyProbe {
  double freq_hz = 0.0;
  double expected = 0.0;  // freq_hz * hold seconds
  std::size_t segments = 0;
  std::uint64_t count = 0;  // summed over all segments
};

// Holds one cell's encoder input at the voltage whose oscillator period is
// 1000/freq_hz for hold_ms, then releases and runs two more seconds.
FrequencyProbe probe_frequency(const PipelineConfig& cfg, double freq_hz, double hold_ms = 4000.0,
                               std::size_t cell = 4);

struct CalibrationRanges {
  std::vector<double> eta{0.5, 0.7, 0.9};
  std::vector<double> tau_ms{200.0, 250.0, 300.0};
  std::vector<double> theta1{1.5, 2.0};
  std::vector<double> theta2{2.5, 3.0};
  std::vector<double> theta3{3.25, 3.5};
  std::vector<double> freqs_hz{2.5, 4.0, 6.0, 8.0, 11.0};
  double hold_ms = 4000.0;
  double tolerance = 0.2;

  void validate() const;
};

struct CalibrationRow {
  double eta = 0.0;
  double tau_ms = 0.0;
  std::array<double, 3> theta{};
  std::vector<FrequencyProbe> probes;
  double margin = 0.0;  // min over probes of 1 - |count - expected| / expected
  bool pass = false;    // every probe a single segment within tolerance
};

struct CalibrationResult {
  PipelineConfig best;
  std::vector<CalibrationRow> table;  // passing rows first, then by margin descending
};

// Grid search over the ranges, every other parameter taken from base.
// Throws CalibrationError, naming the best attempt, when no row passes.
CalibrationResult calibrate(const PipelineConfig& base, const CalibrationRanges& ranges);

}  // namespace tactile
