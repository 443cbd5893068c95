#include "tactile/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "tactile/errors.hpp"
#include "tactile/scenario.hpp"

namespace tactile {

using nlohmann::json;

void PipelineConfig::validate() const {
  auto tagged = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("[config:") + section + "] " + e.what());
    } catch (const Error& e) {
      throw ConfigError(std::string("[config:") + section + "] " + e.what());
    }
  };
  if (!(tick_ms > 0.0)) throw ConfigError("[config] tick_ms must be positive");
  tagged("sensor", [&] { sensor.validate(); });
  tagged("encoder", [&] {
    encoder.validate();
    if (tick_ms > encoder.min_period_ms()) {
      throw ConfigError("tick is coarser than the minimum pulse period");
    }
    if (tick_ms > encoder.pulse_width_ms / 2.0) {
      throw ConfigError("tick must be at most half the pulse width");
    }
  });
  tagged("synapse", [&] { synapse.validate(); });
  tagged("quantizer", [&] { quantizer.validate(); });
  tagged("codec", [&] { codec.validate(); });
  tagged("analyzer", [&] { analyzer.validate(); });
  tagged("schedule", [&] {
    const double w = codec.window_ms / tick_ms;
    if (std::abs(w - std::round(w)) > 1e-9) {
      throw ConfigError("tick_ms must divide the analysis window");
    }
    const auto n = frames_per_window();
    if (static_cast<std::size_t>(std::llround(w)) < n) {
      throw ConfigError("window holds more samples than ticks");
    }
    const double expected = codec.window_ms / static_cast<double>(n);
    if (std::abs(quantizer.sample_period_ms - expected) > 1e-3) {
      throw ConfigError("quantizer sample_period_ms must equal window_ms / units per window (" +
                        std::to_string(expected) + ")");
    }
  });
}

std::size_t PipelineConfig::ticks_per_window() const {
  return static_cast<std::size_t>(std::llround(codec.window_ms / tick_ms));
}

std::size_t PipelineConfig::sample_tick(std::size_t s) const {
  const std::size_t n = frames_per_window();
  const std::size_t w = ticks_per_window();
  return (s / n) * w + ((s % n) * w) / n;
}

double Stimulus::end_ms() const noexcept {
  double end = trace.empty() ? 0.0 : trace.back().t_ms;
  for (const auto& p : presses) end = std::max(end, p.t_off_ms);
  for (const auto& h : holds) end = std::max(end, h.t_off_ms);
  return end;
}

Drive Stimulus::drive_at(double t, std::size_t& cursor) const {
  Drive d{};
  if (!trace.empty() && t + 1e-9 >= trace.front().t_ms) {
    while (cursor + 1 < trace.size() && trace[cursor + 1].t_ms <= t + 1e-9) ++cursor;
    for (std::size_t c = 0; c < kChannels; ++c) d[c].kpa = trace[cursor].kpa[c];
  }
  for (const auto& p : presses) {
    if (p.t_on_ms <= t + 1e-9 && t + 1e-9 < p.t_off_ms) d[p.cell].kpa = std::max(d[p.cell].kpa, p.kpa);
  }
  for (const auto& h : holds) {
    if (h.t_on_ms <= t + 1e-9 && t + 1e-9 < h.t_off_ms) d[h.cell].volts = h.volts;
  }
  return d;
}

void Stimulus::validate(double max_kpa) const {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0 && !(trace[i].t_ms > trace[i - 1].t_ms)) {
      throw FormatError("stimulus trace timestamps must be strictly increasing");
    }
    validate_frame(trace[i], max_kpa);
  }
  for (const auto& p : presses) {
    if (p.cell >= kChannels) throw ConfigError("press cell out of range 0..8");
    if (!(p.kpa >= 0.0 && p.kpa <= max_kpa)) throw RangeError("press pressure outside sensor range");
    if (!(p.t_off_ms >= p.t_on_ms)) throw ConfigError("press ends before it starts");
  }
  for (const auto& h : holds) {
    if (h.cell >= kChannels) throw ConfigError("voltage hold cell out of range 0..8");
    if (!(h.volts >= 0.0 && h.volts <= 5.0)) throw RangeError("voltage hold outside [0, 5] V");
    if (!(h.t_off_ms >= h.t_on_ms)) throw ConfigError("voltage hold ends before it starts");
  }
}

double ScenarioConfig::resolved_duration_ms() const {
  const double window = pipeline.codec.window_ms;
  const double raw = duration_ms > 0.0 ? duration_ms : stimulus.end_ms() + tail_ms;
  return std::max(1.0, std::ceil(raw / window - 1e-9)) * window;
}

namespace {

// Rejects keys outside `allowed` so typos in config files surface.
void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string("[config:") + section + "] must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) {
      throw ConfigError(std::string("[config:") + section + "] unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("[config] bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig cfg;
  check_keys(j, "pipeline",
             {"tick_ms", "sensor", "encoder", "synapse", "quantizer", "codec", "analyzer"});
  read(j, "tick_ms", cfg.tick_ms);
  if (j.contains("sensor")) {
    const auto& s = j["sensor"];
    check_keys(s, "sensor", {"r0_ohm", "vcc", "r_ref_ohm", "lag_tau_ms", "curve"});
    read(s, "r0_ohm", cfg.sensor.r0_ohm);
    read(s, "vcc", cfg.sensor.divider.vcc);
    read(s, "r_ref_ohm", cfg.sensor.divider.r_ref_ohm);
    read(s, "lag_tau_ms", cfg.sensor.lag_tau_ms);
    if (s.contains("curve")) {
      const auto& c = s["curve"];
      check_keys(c, "sensor.curve", {"breakpoints", "slopes"});
      std::vector<double> bp, sl;
      read(c, "breakpoints", bp);
      read(c, "slopes", sl);
      cfg.sensor.curve = SensitivityCurve(bp, sl);
    }
  }
  if (j.contains("encoder")) {
    const auto& e = j["encoder"];
    check_keys(e, "encoder", {"v_detect", "pulse_width_ms", "rf_ohm", "r_ohm", "v_high", "f_max_hw",
                              "quantize_adc"});
    read(e, "v_detect", cfg.encoder.v_detect);
    read(e, "pulse_width_ms", cfg.encoder.pulse_width_ms);
    read(e, "rf_ohm", cfg.encoder.rf_ohm);
    read(e, "r_ohm", cfg.encoder.r_ohm);
    read(e, "v_high", cfg.encoder.v_high);
    read(e, "f_max_hw", cfg.encoder.f_max_hw);
    read(e, "quantize_adc", cfg.encoder.quantize_adc);
  }
  if (j.contains("synapse")) {
    const auto& s = j["synapse"];
    check_keys(s, "synapse", {"tau_ms", "eta", "a_ref", "d_ref_ms", "w_max", "i_off", "on_off_ratio"});
    read(s, "tau_ms", cfg.synapse.tau_ms);
    read(s, "eta", cfg.synapse.eta);
    read(s, "a_ref", cfg.synapse.a_ref);
    read(s, "d_ref_ms", cfg.synapse.d_ref_ms);
    read(s, "w_max", cfg.synapse.w_max);
    read(s, "i_off", cfg.synapse.i_off);
    read(s, "on_off_ratio", cfg.synapse.on_off_ratio);
  }
  if (j.contains("quantizer")) {
    const auto& q = j["quantizer"];
    check_keys(q, "quantizer", {"k_iv", "theta", "sample_period_ms"});
    read(q, "k_iv", cfg.quantizer.k_iv);
    read(q, "theta", cfg.quantizer.theta);
    read(q, "sample_period_ms", cfg.quantizer.sample_period_ms);
  }
  if (j.contains("codec")) {
    const auto& c = j["codec"];
    check_keys(c, "codec", {"baud", "window_ms"});
    read(c, "baud", cfg.codec.baud);
    read(c, "window_ms", cfg.codec.window_ms);
    // Keep the sampling cadence tied to the wire rate unless given explicitly.
    if (!(j.contains("quantizer") && j["quantizer"].contains("sample_period_ms"))) {
      cfg.quantizer.sample_period_ms =
          cfg.codec.window_ms / static_cast<double>(std::max<std::size_t>(1, cfg.codec.units_per_window()));
    }
  }
  if (j.contains("analyzer")) {
    const auto& a = j["analyzer"];
    check_keys(a, "analyzer", {"gap_windows", "letter_gap_windows", "pooling"});
    read(a, "gap_windows", cfg.analyzer.gap_windows);
    read(a, "letter_gap_windows", cfg.analyzer.letter_gap_windows);
    if (a.contains("pooling")) {
      const auto p = a["pooling"].get<std::string>();
      if (p == "max") cfg.analyzer.pooling = Pooling::Max;
      else if (p == "sum") cfg.analyzer.pooling = Pooling::Sum;
      else throw ConfigError("[config:analyzer] pooling must be 'max' or 'sum'");
    }
  }
  cfg.validate();
  return cfg;
}

json to_json(const PipelineConfig& cfg) {
  return json{
      {"tick_ms", cfg.tick_ms},
      {"sensor",
       {{"r0_ohm", cfg.sensor.r0_ohm},
        {"vcc", cfg.sensor.divider.vcc},
        {"r_ref_ohm", cfg.sensor.divider.r_ref_ohm},
        {"lag_tau_ms", cfg.sensor.lag_tau_ms},
        {"curve",
         {{"breakpoints", cfg.sensor.curve.breakpoints()}, {"slopes", cfg.sensor.curve.slopes()}}}}},
      {"encoder",
       {{"v_detect", cfg.encoder.v_detect},
        {"pulse_width_ms", cfg.encoder.pulse_width_ms},
        {"rf_ohm", cfg.encoder.rf_ohm},
        {"r_ohm", cfg.encoder.r_ohm},
        {"v_high", cfg.encoder.v_high},
        {"f_max_hw", cfg.encoder.f_max_hw},
        {"quantize_adc", cfg.encoder.quantize_adc}}},
      {"synapse",
       {{"tau_ms", cfg.synapse.tau_ms},
        {"eta", cfg.synapse.eta},
        {"a_ref", cfg.synapse.a_ref},
        {"d_ref_ms", cfg.synapse.d_ref_ms},
        {"w_max", cfg.synapse.w_max},
        {"i_off", cfg.synapse.i_off},
        {"on_off_ratio", cfg.synapse.on_off_ratio}}},
      {"quantizer",
       {{"k_iv", cfg.quantizer.k_iv},
        {"theta", cfg.quantizer.theta},
        {"sample_period_ms", cfg.quantizer.sample_period_ms}}},
      {"codec", {{"baud", cfg.codec.baud}, {"window_ms", cfg.codec.window_ms}}},
      {"analyzer",
       {{"gap_windows", cfg.analyzer.gap_windows},
        {"letter_gap_windows", cfg.analyzer.letter_gap_windows},
        {"pooling", cfg.analyzer.pooling == Pooling::Max ? "max" : "sum"}}},
  };
}

ScenarioConfig scenario_config_from_json(const json& j, const std::string& base_dir) {
  check_keys(j, "scenario", {"pipeline", "stimulus", "duration_ms", "tail_ms", "seed",
                             "record_traces", "model"});
  ScenarioConfig sc;
  if (j.contains("pipeline")) sc.pipeline = pipeline_config_from_json(j["pipeline"]);
  read(j, "duration_ms", sc.duration_ms);
  read(j, "tail_ms", sc.tail_ms);
  read(j, "seed", sc.seed);
  read(j, "record_traces", sc.record_traces);
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path.string() : (std::filesystem::path(base_dir) / path).string();
  };
  if (j.contains("model")) sc.model_path = resolve(j["model"].get<std::string>());
  if (j.contains("stimulus")) {
    const auto& s = j["stimulus"];
    check_keys(s, "stimulus", {"csv", "presses", "voltage_holds", "ramp", "morse"});
    if (s.contains("csv") && s.contains("ramp")) {
      throw ConfigError("[config:stimulus] csv and ramp both define the pressure trace");
    }
    if (s.contains("csv")) {
      const auto path = resolve(s["csv"].get<std::string>());
      std::ifstream in(path);
      if (!in) throw ConfigError("[config:stimulus] cannot open pressure CSV '" + path + "'");
      sc.stimulus.trace = read_pressure_csv(in);
    }
    if (s.contains("ramp")) sc.stimulus.trace = ramp_stimulus(ramp_script_from_json(s["ramp"])).trace;
    if (s.contains("morse")) {
      const Stimulus m = morse_stimulus(morse_script_from_json(s["morse"]));
      sc.stimulus.presses.insert(sc.stimulus.presses.end(), m.presses.begin(), m.presses.end());
    }
    if (s.contains("presses")) {
      for (const auto& p : s["presses"]) {
        check_keys(p, "stimulus.presses", {"cell", "kpa", "t_on_ms", "t_off_ms"});
        Press pr;
        read(p, "cell", pr.cell);
        read(p, "kpa", pr.kpa);
        read(p, "t_on_ms", pr.t_on_ms);
        read(p, "t_off_ms", pr.t_off_ms);
        sc.stimulus.presses.push_back(pr);
      }
    }
    if (s.contains("voltage_holds")) {
      for (const auto& h : s["voltage_holds"]) {
        check_keys(h, "stimulus.voltage_holds", {"cell", "volts", "t_on_ms", "t_off_ms"});
        VoltageHold vh;
        read(h, "cell", vh.cell);
        read(h, "volts", vh.volts);
        read(h, "t_on_ms", vh.t_on_ms);
        read(h, "t_off_ms", vh.t_off_ms);
        sc.stimulus.holds.push_back(vh);
      }
    }
  }
  try {
    sc.stimulus.validate(sc.pipeline.sensor.curve.max_pressure());
  } catch (const Error& e) {
    throw ConfigError(std::string("[config:stimulus] ") + e.what());
  }
  return sc;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_config_from_json(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace tactile
