#include "tactile/synapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "tactile/errors.hpp"

namespace tactile {

void SynapseParams::validate() const {
  if (!(tau_ms > 0.0)) throw ConfigError("synapse tau_ms must be positive");
  if (!(eta > 0.0)) throw ConfigError("synapse eta must be positive");
  if (!(a_ref > 0.0 && d_ref_ms > 0.0)) throw ConfigError("synapse a_ref/d_ref must be positive");
  if (!(w_max > 0.0)) throw ConfigError("synapse w_max must be positive");
  if (!(i_off > 0.0)) throw ConfigError("synapse i_off must be positive");
  if (!(on_off_ratio >= 1.0)) throw ConfigError("synapse on_off_ratio must be >= 1");
}

double drain_current(double w, const SynapseParams& p) noexcept {
  return p.i_off * (1.0 + (p.on_off_ratio - 1.0) * w / p.w_max);
}

SynapseStep step(const SynapseState& s, double gate_v, double dt_ms, const SynapseParams& p) {
  if (!(dt_ms > 0.0)) throw DomainError("synapse step needs dt > 0");
  double w = s.w * std::exp(-dt_ms / p.tau_ms);
  if (gate_v < 0.0) {
    w += p.eta * (-gate_v / p.a_ref) * (dt_ms / p.d_ref_ms) * (1.0 - w / p.w_max);
  }
  w = std::clamp(w, 0.0, p.w_max);
  return {{w, s.t_last_ms + dt_ms}, drain_current(w, p)};
}

CurrentTrace simulate(const PulseTrain& train, const SynapseParams& p, double tick_ms,
                      double duration_ms) {
  p.validate();
  if (!(tick_ms > 0.0)) throw ConfigError("tick_ms must be positive");
  double min_width = std::numeric_limits<double>::infinity();
  for (const auto& pulse : train.pulses) min_width = std::min(min_width, pulse.width_ms);
  if (tick_ms > min_width / 2.0) {
    throw ConfigError("tick " + std::to_string(tick_ms) +
                      " ms is coarser than half the narrowest pulse");
  }

  CurrentTrace out;
  out.tick_ms = tick_ms;
  const auto ticks = static_cast<std::size_t>(std::ceil(duration_ms / tick_ms - 1e-9));
  out.amps.reserve(ticks);
  SynapseState state;
  std::size_t next = 0;  // first pulse that has not ended yet
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * tick_ms;
    while (next < train.pulses.size() &&
           train.pulses[next].t_ms + train.pulses[next].width_ms <= t + 1e-9) {
      ++next;
    }
    double gate = 0.0;
    if (next < train.pulses.size() && train.pulses[next].t_ms <= t + 1e-9) {
      gate = train.pulses[next].amplitude;
    }
    auto r = step(state, gate, tick_ms, p);
    state = r.state;
    out.amps.push_back(r.i_drain);
  }
  return out;
}

PeakMetrics peak_metrics(const std::vector<double>& trace) {
  if (trace.empty()) throw DomainError("peak_metrics needs a non-empty trace");
  PeakMetrics m;
  m.global_max = *std::max_element(trace.begin(), trace.end());
  // A local maximum is a plateau (possibly one sample) entered from below and
  // left downward.
  bool rising = false;
  std::size_t plateau_start = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] > trace[i - 1]) {
      rising = true;
      plateau_start = i;
    } else if (trace[i] < trace[i - 1]) {
      if (rising) m.local_maxima.push_back({plateau_start, trace[i - 1]});
      rising = false;
    }
  }
  return m;
}

void write_current_csv(std::ostream& out, const std::vector<CurrentTrace>& traces) {
  out << "t_ms,channel,amps\n";
  out.precision(12);
  for (std::size_t c = 0; c < traces.size(); ++c) {
    const auto& tr = traces[c];
    for (std::size_t k = 0; k < tr.amps.size(); ++k) {
      out << static_cast<double>(k) * tr.tick_ms << ',' << c << ',' << tr.amps[k] << '\n';
    }
  }
}

}  // namespace tactile
