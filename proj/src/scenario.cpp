#include "tactile/scenario.hpp"

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string_view>

#include "tactile/errors.hpp"
#include "tactile/rng.hpp"

namespace tactile {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const char* section, std::initializer_list<std::string_view> known) {
  if (!j.is_object()) throw ConfigError(std::string("[config:") + section + "] must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(std::string("[config:") + section + "] unknown key '" + key + "'");
    }
  }
}

class Collector : public PipelineObserver {
 public:
  Collector(RunReport& run, bool keep_frames) : run_(run), keep_frames_(keep_frames) {}

  void on_frame(const CodeFrame& f) override {
    if (keep_frames_) run_.frames.push_back(f);
  }
  void on_window(const WindowReport& r) override { run_.windows.push_back(r); }
  void on_segment(const Segment& s) override { run_.segments.push_back(s); }
  void on_letter(const LetterResult& l) override { run_.letters.push_back(l); }
  void on_symbol(const SymbolResult& s) override { run_.symbols.push_back(s); }

 private:
  RunReport& run_;
  bool keep_frames_;
};

}  // namespace

std::string RunReport::decoded_text() const {
  std::string s;
  for (const auto& l : letters) {
    if (l.continuous) s += '~';
    else s += l.letter.value_or('?');
  }
  return s;
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  cfg.pipeline.validate();
  cfg.stimulus.validate(cfg.pipeline.sensor.curve.max_pressure());

  std::optional<Mlp> model;
  if (cfg.model_path) {
    std::ifstream in(*cfg.model_path);
    if (!in) throw ConfigError("[config:model] cannot open '" + *cfg.model_path + "'");
    model = Mlp::load(in);
  }

  RunReport run;
  run.seed = cfg.seed;
  run.duration_ms = cfg.resolved_duration_ms();
  Collector collector(run, cfg.record_traces);
  Pipeline pipeline(cfg.pipeline, collector, model ? &*model : nullptr);

  const auto ticks = static_cast<std::uint64_t>(std::llround(run.duration_ms / cfg.pipeline.tick_ms));
  if (cfg.record_traces) {
    for (std::size_t c = 0; c < kChannels; ++c) run.pulses[c].channel = c;
    run.currents.assign(kChannels, CurrentTrace{cfg.pipeline.tick_ms, {}});
    for (auto& tr : run.currents) tr.amps.reserve(ticks);
    pipeline.on_pulse = [&run](std::size_t c, const Pulse& p) { run.pulses[c].pulses.push_back(p); };
    pipeline.on_currents = [&run](double, const std::array<double, kChannels>& amps) {
      for (std::size_t c = 0; c < kChannels; ++c) run.currents[c].amps.push_back(amps[c]);
    };
  }

  std::size_t cursor = 0;
  for (std::uint64_t k = 0; k < ticks; ++k) {
    pipeline.step(cfg.stimulus.drive_at(pipeline.now_ms(), cursor));
  }
  pipeline.finish();
  run.counters = pipeline.counters();
  if (run.counters.units_decoded != run.counters.units_encoded) {
    throw StageError("codec", "decoded " + std::to_string(run.counters.units_decoded) +
                                  " wire units but encoded " +
                                  std::to_string(run.counters.units_encoded));
  }
  run.efficiency = efficiency_report(run, cfg.pipeline);
  return run;
}

EfficiencyReport efficiency_report(const RunReport& run, const PipelineConfig& cfg) {
  EfficiencyReport e;
  e.pulses = run.counters.pulses;
  for (const auto& w : run.windows) e.active_windows += w.active ? 1 : 0;
  e.units_transmitted = e.active_windows * cfg.frames_per_window();
  e.wire_bits = e.units_transmitted * kUnitBits;
  e.duration_s = static_cast<double>(run.windows.size()) * cfg.codec.window_ms / 1000.0;
  e.baseline_bits = static_cast<double>(kChannels) * 12.0 * 1000.0 * e.duration_s;
  e.reduction_ratio =
      e.baseline_bits > 0.0
          ? std::clamp(1.0 - static_cast<double>(e.wire_bits) / e.baseline_bits, 0.0, 1.0)
          : 1.0;
  return e;
}

json to_json(const WindowReport& r) {
  std::vector<int> max(r.max.begin(), r.max.end());
  return json{{"window", r.window_idx}, {"t_start_ms", r.t_start_ms}, {"max", max},
              {"peaks", r.peaks},       {"active", r.active}};
}

json to_json(const Segment& s) {
  return json{{"start_window", s.start_window},
              {"end_window", s.end_window},
              {"total_count", s.total_count},
              {"class", std::string(to_string(classify_segment(s.total_count)))}};
}

json to_json(const LetterResult& l) {
  json segs = json::array();
  for (const auto& s : l.segments) segs.push_back(to_json(s));
  return json{{"segments", segs},
              {"code", l.code},
              {"letter", l.letter ? json(std::string(1, *l.letter)) : json(nullptr)},
              {"continuous", l.continuous}};
}

json to_json(const SymbolResult& s) {
  return json{{"first_window", s.first_window},
              {"last_window", s.last_window},
              {"feature", s.feature},
              {"symbol", s.symbol ? json(std::string(to_string(*s.symbol))) : json(nullptr)},
              {"probs", s.probs}};
}

json to_json(const EfficiencyReport& e) {
  return json{{"pulses", e.pulses},
              {"active_windows", e.active_windows},
              {"units_transmitted", e.units_transmitted},
              {"wire_bits", e.wire_bits},
              {"duration_s", e.duration_s},
              {"baseline_bits", e.baseline_bits},
              {"reduction_ratio", e.reduction_ratio},
              {"metric", "transmitted-data proxy (bits), not electrical power"}};
}

json summary_json(const RunReport& run) {
  json letters = json::array();
  for (const auto& l : run.letters) letters.push_back(to_json(l));
  json symbols = json::array();
  for (const auto& s : run.symbols) symbols.push_back(to_json(s));
  json segments = json::array();
  for (const auto& s : run.segments) segments.push_back(to_json(s));
  std::uint64_t active = 0;
  for (const auto& w : run.windows) active += w.active ? 1 : 0;
  return json{{"seed", run.seed},
              {"duration_ms", run.duration_ms},
              {"ticks", run.counters.ticks},
              {"pulses", run.counters.pulses},
              {"units_encoded", run.counters.units_encoded},
              {"units_decoded", run.counters.units_decoded},
              {"windows", run.windows.size()},
              {"active_windows", active},
              {"segments", segments},
              {"letters", letters},
              {"text", run.decoded_text()},
              {"symbols", symbols},
              {"efficiency", to_json(run.efficiency)}};
}

void write_run_outputs(const RunReport& run, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw Error(std::string("cannot write ") + name + " in '" + dir + "'");
    return out;
  };
  {
    auto out = open("summary.json");
    out << summary_json(run).dump(2) << '\n';
  }
  {
    auto out = open("windows.jsonl");
    for (const auto& w : run.windows) out << to_json(w).dump() << '\n';
  }
  {
    auto out = open("segments.jsonl");
    for (const auto& s : run.segments) out << to_json(s).dump() << '\n';
  }
  if (!run.currents.empty()) {
    auto pulses = open("pulses.jsonl");
    write_pulses_jsonl(pulses, run.pulses);
    auto currents = open("currents.csv");
    write_current_csv(currents, run.currents);
    auto codes = open("codes.csv");
    write_codes_csv(codes, run.frames);
  }
}

MorseScript morse_script_from_json(const json& j) {
  reject_unknown(j, "morse", {"text", "cell", "kpa", "dot_ms", "dash_ms", "symbol_gap_ms", "letter_gap_ms",
                             "lead_ms", "timing_jitter", "pressure_jitter", "seed"});
  MorseScript s;
  auto read = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  try {
    read("text", s.text);
    read("cell", s.cell);
    read("kpa", s.kpa);
    read("dot_ms", s.dot_ms);
    read("dash_ms", s.dash_ms);
    read("symbol_gap_ms", s.symbol_gap_ms);
    read("letter_gap_ms", s.letter_gap_ms);
    read("lead_ms", s.lead_ms);
    read("timing_jitter", s.timing_jitter);
    read("pressure_jitter", s.pressure_jitter);
    read("seed", s.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("[config:morse] ") + e.what());
  }
  if (s.cell >= kChannels) throw ConfigError("[config:morse] cell out of range 0..8");
  return s;
}

Stimulus morse_stimulus(const MorseScript& script, const MorseTable& table) {
  Rng rng(script.seed);
  auto jitter = [&](double base, double amount) {
    return amount > 0.0 ? base * (1.0 + rng.uniform(-amount, amount)) : base;
  };
  Stimulus stim;
  double t = script.lead_ms;
  for (std::size_t i = 0; i < script.text.size(); ++i) {
    const char letter = script.text[i];
    const auto code = table.code_for(letter);
    if (!code) throw ConfigError(std::string("[config:morse] no code for letter '") + letter + "'");
    for (std::size_t k = 0; k < code->size(); ++k) {
      const double len = jitter((*code)[k] == '-' ? script.dash_ms : script.dot_ms, script.timing_jitter);
      const double kpa = std::min(jitter(script.kpa, script.pressure_jitter), 150.0);
      stim.presses.push_back({script.cell, kpa, t, t + len});
      t += len;
      if (k + 1 < code->size()) t += jitter(script.symbol_gap_ms, script.timing_jitter);
    }
    if (i + 1 < script.text.size()) t += jitter(script.letter_gap_ms, script.timing_jitter);
  }
  return stim;
}


double RampScript::pressure_at(double t_ms) const noexcept {
  auto shape = [&](double u) { return min_kpa * std::pow(max_kpa / min_kpa, u); };
  double u = t_ms - lead_ms;
  if (u < 0.0 || t_ms >= end_ms()) return 0.0;
  if (u < rise_ms) return shape(u / rise_ms);
  u -= rise_ms;
  if (u < hold_ms) return max_kpa;
  u -= hold_ms;
  return shape(1.0 - u / rise_ms);
}

RampScript ramp_script_from_json(const json& j) {
  reject_unknown(j, "ramp", {"min_kpa", "max_kpa", "rise_ms", "hold_ms", "lead_ms", "frame_ms", "profile"});
  RampScript s;
  auto read = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  try {
    read("min_kpa", s.min_kpa);
    read("max_kpa", s.max_kpa);
    read("rise_ms", s.rise_ms);
    read("hold_ms", s.hold_ms);
    read("lead_ms", s.lead_ms);
    read("frame_ms", s.frame_ms);
    read("profile", s.profile);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("[config:ramp] ") + e.what());
  }
  if (!(0.0 < s.min_kpa && s.min_kpa < s.max_kpa && s.max_kpa <= 150.0)) {
    throw ConfigError("[config:ramp] need 0 < min_kpa < max_kpa <= 150");
  }
  if (!(s.rise_ms > 0.0 && s.hold_ms >= 0.0 && s.lead_ms >= 0.0 && s.frame_ms > 0.0)) {
    throw ConfigError("[config:ramp] durations must be non-negative, rise and frame positive");
  }
  for (double f : s.profile) {
    if (!(f >= 0.0 && f * s.max_kpa <= 150.0)) throw ConfigError("[config:ramp] profile scales pressure out of range");
  }
  return s;
}

Stimulus ramp_stimulus(const RampScript& script) {
  Stimulus stim;
  const double end = script.end_ms() + script.frame_ms;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * script.frame_ms;
    if (t > end) break;
    PressureFrame f;
    f.t_ms = t;
    const double p = script.pressure_at(t);
    for (std::size_t c = 0; c < kChannels; ++c) f.kpa[c] = script.profile[c] * p;
    stim.trace.push_back(f);
  }
  return stim;
}

TrendReport trend_report(const RunReport& run, const RampScript& script, const PipelineConfig& cfg) {
  TrendReport r;
  const double w = cfg.codec.window_ms;
  const double fall_start = script.lead_ms + script.rise_ms + script.hold_ms;
  for (const auto& win : run.windows) {
    const double t0 = win.t_start_ms;
    const bool in_rise = t0 >= script.lead_ms && t0 + w <= script.lead_ms + script.rise_ms;
    const bool in_fall = t0 >= fall_start && t0 + w <= script.end_ms();
    if (!in_rise && !in_fall) continue;
    double mean = 0.0;
    const int steps = static_cast<int>(std::lround(w / cfg.tick_ms));
    for (int k = 0; k < steps; ++k) mean += script.pressure_at(t0 + k * cfg.tick_ms);
    r.pressure.push_back(mean / steps);
    r.count.push_back(cfg.analyzer.pooled(win));
  }
  r.spearman = spearman(r.pressure, r.count);
  return r;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    const double avg = static_cast<double>(i + j + 1) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = avg;
    i = j;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("spearman needs equal-length inputs");
  if (x.size() < 2) throw DomainError("spearman needs at least two points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace tactile
