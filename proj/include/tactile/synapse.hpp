#pragma once

#include <iosfwd>
#include <vector>

#include "tactile/encoder.hpp"

namespace tactile {

// Single-state saturating leaky integrator standing in for the ion-gel gated
// transistor. w decays with tau_ms; while the gate is driven negative it grows
// by eta * (|V|/a_ref) * (dt/d_ref) * (1 - w/w_max). The drain current maps
// linearly from I_off at w = 0 to I_off * on_off_ratio at w = w_max.
struct SynapseParams {
  double tau_ms = 250.0;
  double eta = 0.7;
  double a_ref = 2.0;
  double d_ref_ms = 10.0;
  double w_max = 1.0;
  double i_off = 1e-9;
  double on_off_ratio = 1e4;

  void validate() const;
  double i_on() const noexcept { return i_off * on_off_ratio; }
};

struct SynapseState {
  double w = 0.0;
  double t_last_ms = 0.0;
};

struct SynapseStep {
  SynapseState state;
  double i_drain = 0.0;
};

double drain_current(double w, const SynapseParams& p) noexcept;

SynapseStep step(const SynapseState& s, double gate_v, double dt_ms, const SynapseParams& p);

// Drain current sampled once per tick: sample k is the current after the tick
// that starts at t = k * tick_ms.
struct CurrentTrace {
  double tick_ms = 1.0;
  std::vector<double> amps;
};

CurrentTrace simulate(const PulseTrain& train, const SynapseParams& p, double tick_ms,
                      double duration_ms);

struct LocalMax {
  std::size_t index = 0;
  double value = 0.0;
};

struct PeakMetrics {
  double global_max = 0.0;
  std::vector<LocalMax> local_maxima;
};

PeakMetrics peak_metrics(const std::vector<double>& trace);

// t_ms,channel,amps
void write_current_csv(std::ostream& out, const std::vector<CurrentTrace>& traces);

}  // namespace tactile
