#include "tactile/dataset.hpp"

#include <algorithm>

#include "tactile/errors.hpp"
#include "tactile/rng.hpp"
#include "tactile/scenario.hpp"

namespace tactile {

void SymbolGenConfig::validate() const {
  if (n_per_class < 1) throw ConfigError("[config:symbols] n_per_class must be at least 1");
  if (!(noise >= 0.0)) throw ConfigError("[config:symbols] noise must be non-negative");
  if (!(0.0 <= active_min_kpa && active_min_kpa <= active_max_kpa && active_max_kpa <= 150.0)) {
    throw ConfigError("[config:symbols] active pressure range must lie in [0, 150] kPa");
  }
  if (!(inactive_max_kpa >= 0.0)) throw ConfigError("[config:symbols] inactive_max_kpa must be non-negative");
  if (!(press_ms > 0.0) || !(duration_jitter >= 0.0 && duration_jitter < 1.0)) {
    throw ConfigError("[config:symbols] press_ms must be positive and duration_jitter in [0, 1)");
  }
  if (!(onset_ms >= 0.0) || !(onset_jitter_ms >= 0.0) || !(tail_ms >= 0.0)) {
    throw ConfigError("[config:symbols] onset and tail must be non-negative");
  }
}

Stimulus symbol_stimulus(SymbolClass label, const SymbolGenConfig& gen, Rng& rng) {
  const auto mask = symbol_mask(label);
  const double onset = gen.onset_ms + gen.noise * rng.uniform(0.0, gen.onset_jitter_ms);
  const double len = gen.press_ms * (1.0 + gen.noise * rng.uniform(-gen.duration_jitter, gen.duration_jitter));
  Stimulus stim;
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double kpa = mask[c] ? rng.uniform(gen.active_min_kpa, gen.active_max_kpa)
                               : rng.uniform(0.0, gen.inactive_max_kpa * gen.noise);
    if (kpa > 0.0) stim.presses.push_back({c, std::min(kpa, 150.0), onset, onset + len});
  }
  return stim;
}

SymbolDataset gen_symbol_dataset(const PipelineConfig& pipeline, const SymbolGenConfig& gen) {
  gen.validate();
  pipeline.validate();
  Rng rng(gen.seed);
  SymbolDataset ds;
  ds.seed = gen.seed;
  ds.noise = gen.noise;
  ds.samples.reserve(gen.n_per_class * kSymbolClasses);
  for (std::size_t i = 0; i < gen.n_per_class; ++i) {
    for (SymbolClass label : kAllSymbols) {
      ScenarioConfig sc;
      sc.pipeline = pipeline;
      sc.stimulus = symbol_stimulus(label, gen, rng);
      sc.tail_ms = gen.tail_ms;
      const RunReport run = run_scenario(sc);
      if (run.symbols.empty()) {
        throw StageError("symbols", "sample " + std::to_string(ds.samples.size()) + " produced no active window");
      }
      // A press split by a silent window yields several results; merge them.
      Feature f{};
      for (const auto& s : run.symbols) {
        for (std::size_t c = 0; c < kChannels; ++c) f[c] = std::max(f[c], s.feature[c]);
      }
      ds.samples.push_back({f, label});
    }
  }
  return ds;
}

}  // namespace tactile
