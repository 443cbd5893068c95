#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactile/analyzer.hpp"
#include "tactile/encoder.hpp"
#include "tactile/quantizer.hpp"
#include "tactile/sensor.hpp"
#include "tactile/synapse.hpp"
#include "tactile/wire.hpp"

namespace tactile {

struct PipelineConfig {
  double tick_ms = 1.0;
  SensorConfig sensor;
  EncoderConfig encoder;
  SynapseParams synapse;
  ThresholdBank quantizer;
  CodecConfig codec;
  AnalyzerConfig analyzer;

  // Throws ConfigError naming the offending section.
  void validate() const;
  std::size_t ticks_per_window() const;
  std::size_t frames_per_window() const { return codec.units_per_window(); }
  // Tick index of global sample s; exact over every window.
  std::size_t sample_tick(std::size_t s) const;
};

struct Press {
  std::size_t cell = 4;
  double kpa = 60.0;
  double t_on_ms = 0.0;
  double t_off_ms = 0.0;
};

// Drives the encoder input directly, bypassing the sensor, as a frequency
// signal source would.
struct VoltageHold {
  std::size_t cell = 4;
  double volts = 0.0;
  double t_on_ms = 0.0;
  double t_off_ms = 0.0;
};

struct ChannelDrive {
  double kpa = 0.0;
  std::optional<double> volts;
};

using Drive = std::array<ChannelDrive, kChannels>;

struct Stimulus {
  PressureTrace trace;  // zero-order hold between frames
  std::vector<Press> presses;
  std::vector<VoltageHold> holds;

  double end_ms() const noexcept;
  // Pressure is the larger of the trace value and any active press.
  Drive drive_at(double t_ms, std::size_t& trace_cursor) const;
  void validate(double max_kpa) const;
};

struct ScenarioConfig {
  PipelineConfig pipeline;
  Stimulus stimulus;
  double duration_ms = 0.0;  // 0: stimulus end plus tail, rounded up to whole windows
  double tail_ms = 2000.0;
  std::uint64_t seed = 1;
  bool record_traces = false;
  std::optional<std::string> model_path;

  double resolved_duration_ms() const;
};

PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

// Relative paths inside the config (stimulus.csv, model) resolve against base_dir.
ScenarioConfig scenario_config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
ScenarioConfig load_scenario_config(const std::string& path);

}  // namespace tactile
