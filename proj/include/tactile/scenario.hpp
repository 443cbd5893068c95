#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactile/config.hpp"
#include "tactile/pipeline.hpp"

namespace tactile {

// Transmitted-data proxy for the event-driven power saving. Not watts.
struct EfficiencyReport {
  std::uint64_t pulses = 0;
  std::uint64_t active_windows = 0;
  std::uint64_t units_transmitted = 0;
  std::uint64_t wire_bits = 0;
  double duration_s = 0.0;
  double baseline_bits = 0.0;  // 9 channels x 12-bit ADC x 1 kHz
  double reduction_ratio = 0.0;
};

struct RunReport {
  std::uint64_t seed = 0;
  double duration_ms = 0.0;
  PipelineCounters counters;
  std::vector<WindowReport> windows;
  std::vector<Segment> segments;
  std::vector<LetterResult> letters;
  std::vector<SymbolResult> symbols;
  EfficiencyReport efficiency;

  // Filled only when record_traces is set.
  std::array<PulseTrain, kChannels> pulses;
  std::vector<CurrentTrace> currents;
  std::vector<CodeFrame> frames;

  std::string decoded_text() const;  // '?' for rejected letters, '~' for trend segments
};

RunReport run_scenario(const ScenarioConfig& cfg);

// Counts wire units only for windows with any nonzero code; baseline is
// 108000 bits/s over the analysed duration.
EfficiencyReport efficiency_report(const RunReport& run, const PipelineConfig& cfg);

nlohmann::json to_json(const WindowReport& r);
nlohmann::json to_json(const Segment& s);
nlohmann::json to_json(const LetterResult& l);
nlohmann::json to_json(const SymbolResult& s);
nlohmann::json to_json(const EfficiencyReport& e);
nlohmann::json summary_json(const RunReport& run);

// Writes summary.json, windows.jsonl, segments.jsonl and, with traces,
// pulses.jsonl, currents.csv and codes.csv into dir.
void write_run_outputs(const RunReport& run, const std::string& dir);

// Scripted Morse tapping on one cell. Every press and gap duration is scaled
// by 1 + U[-timing_jitter, timing_jitter] and every pressure by
// 1 + U[-pressure_jitter, pressure_jitter].
struct MorseScript {
  std::string text = "NIMTE";
  std::size_t cell = 4;
  double kpa = 60.0;
  double dot_ms = 500.0;
  double dash_ms = 1800.0;
  double symbol_gap_ms = 1130.0;
  double letter_gap_ms = 2600.0;
  double lead_ms = 400.0;
  double timing_jitter = 0.0;
  double pressure_jitter = 0.0;
  std::uint64_t seed = 1;
};

MorseScript morse_script_from_json(const nlohmann::json& j);
Stimulus morse_stimulus(const MorseScript& script, const MorseTable& table = {});

// Rising-holding-falling press over the whole pad. Pressure grows
// geometrically from min_kpa to max_kpa over rise_ms, holds, and mirrors the
// rise on the way down; each cell sees profile[c] times the pad pressure.
struct RampScript {
  double min_kpa = 0.4;
  double max_kpa = 100.0;
  double rise_ms = 4800.0;
  double hold_ms = 2000.0;
  double lead_ms = 400.0;
  double frame_ms = 10.0;
  std::array<double, kChannels> profile{0.35, 0.5, 0.65, 0.8, 1.0, 0.9, 0.75, 0.6, 0.45};

  double pressure_at(double t_ms) const noexcept;  // pad pressure, before the profile
  double end_ms() const noexcept { return lead_ms + 2.0 * rise_ms + hold_ms; }
};

RampScript ramp_script_from_json(const nlohmann::json& j);
Stimulus ramp_stimulus(const RampScript& script);

struct TrendReport {
  std::vector<double> pressure;  // mean pad pressure per window, rise and fall windows only
  std::vector<double> count;     // pooled peak count of the same windows
  double spearman = 0.0;
};

// Windows lying entirely inside the rise or the fall of the script.
TrendReport trend_report(const RunReport& run, const RampScript& script, const PipelineConfig& cfg);

// Spearman rank correlation with average ranks for ties; 0 when either side
// is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace tactile
