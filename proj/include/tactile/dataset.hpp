#pragma once

#include <cstdint>

#include "tactile/config.hpp"
#include "tactile/symbols.hpp"

namespace tactile {

// Mold presses on the 3x3 pad. Mask cells get U[active_min_kpa, active_max_kpa],
// the rest U[0, inactive_max_kpa * noise]. Press length is scaled by
// 1 + U[-duration_jitter, duration_jitter] * noise and the onset is delayed by
// U[0, onset_jitter_ms) * noise.
struct SymbolGenConfig {
  std::size_t n_per_class = 400;
  double noise = 1.0;
  std::uint64_t seed = 1;
  double active_min_kpa = 40.0;
  double active_max_kpa = 100.0;
  double inactive_max_kpa = 2.0;
  double press_ms = 1200.0;
  double duration_jitter = 0.15;
  double onset_ms = 100.0;
  double onset_jitter_ms = 400.0;
  double tail_ms = 800.0;

  void validate() const;
};

// Stimulus for one sample; exposed so tests can replay a single draw.
Stimulus symbol_stimulus(SymbolClass label, const SymbolGenConfig& gen, Rng& rng);

// Classes interleave round-robin; every sample goes through the full pipeline
// and is featurized over its press windows.
SymbolDataset gen_symbol_dataset(const PipelineConfig& pipeline, const SymbolGenConfig& gen);

}  // namespace tactile
