#include "tactile/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tactile/errors.hpp"
#include "tactile/scenario.hpp"

namespace tactile {

FrequencyProbe probe_frequency(const PipelineConfig& cfg, double freq_hz, double hold_ms,
                               std::size_t cell) {
  if (!(freq_hz > 0.0)) throw DomainError("probe frequency must be positive");
  const double v = voltage_for_period(1000.0 / freq_hz);
  if (v < cfg.encoder.v_detect || v > 5.0) {
    throw DomainError("frequency " + std::to_string(freq_hz) + " Hz is outside the oscillator range");
  }
  ScenarioConfig sc;
  sc.pipeline = cfg;
  sc.stimulus.holds.push_back({cell, v, 0.0, hold_ms});
  sc.tail_ms = 2000.0;
  const RunReport run = run_scenario(sc);

  FrequencyProbe p;
  p.freq_hz = freq_hz;
  p.expected = freq_hz * hold_ms / 1000.0;
  p.segments = run.segments.size();
  for (const auto& s : run.segments) p.count += s.total_count;
  return p;
}

void CalibrationRanges::validate() const {
  auto need = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) throw ConfigError(std::string("[config:calibrate] empty range for ") + name);
  };
  need(eta, "eta");
  need(tau_ms, "tau_ms");
  need(theta1, "theta1");
  need(theta2, "theta2");
  need(theta3, "theta3");
  need(freqs_hz, "freqs_hz");
  if (!(hold_ms > 0.0)) throw ConfigError("[config:calibrate] hold_ms must be positive");
  if (!(tolerance >= 0.0)) throw ConfigError("[config:calibrate] tolerance must be non-negative");
}

CalibrationResult calibrate(const PipelineConfig& base, const CalibrationRanges& ranges) {
  ranges.validate();
  base.validate();

  std::vector<CalibrationRow> rows;
  std::vector<PipelineConfig> configs;
  for (double tau : ranges.tau_ms) {
    for (double eta : ranges.eta) {
      for (double t1 : ranges.theta1) {
        for (double t2 : ranges.theta2) {
          for (double t3 : ranges.theta3) {
            if (!(t1 < t2 && t2 < t3)) continue;
            PipelineConfig cfg = base;
            cfg.synapse.tau_ms = tau;
            cfg.synapse.eta = eta;
            cfg.quantizer.theta = {t1, t2, t3};
            try {
              cfg.validate();
            } catch (const ConfigError&) {
              continue;
            }
            CalibrationRow row{eta, tau, {t1, t2, t3}, {}, 1.0, true};
            for (double f : ranges.freqs_hz) {
              const FrequencyProbe p = probe_frequency(cfg, f, ranges.hold_ms);
              const double err = std::abs(static_cast<double>(p.count) - p.expected) / p.expected;
              row.margin = std::min(row.margin, 1.0 - err);
              if (p.segments != 1 || err > ranges.tolerance) row.pass = false;
              row.probes.push_back(p);
            }
            rows.push_back(std::move(row));
            configs.push_back(cfg);
          }
        }
      }
    }
  }
  if (rows.empty()) throw CalibrationError("no admissible parameter combination in the sweep ranges");

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].pass != rows[b].pass) return rows[a].pass;
    return rows[a].margin > rows[b].margin;
  });

  CalibrationResult result;
  for (std::size_t i : order) result.table.push_back(rows[i]);
  const CalibrationRow& top = result.table.front();
  if (!top.pass) {
    std::ostringstream msg;
    msg << "no configuration passed; best attempt eta=" << top.eta << " tau_ms=" << top.tau_ms
        << " theta=(" << top.theta[0] << ", " << top.theta[1] << ", " << top.theta[2]
        << ") margin=" << top.margin << " counts=";
    for (const auto& p : top.probes) msg << ' ' << p.count << '/' << p.expected;
    throw CalibrationError(msg.str());
  }
  result.best = configs[order.front()];
  return result;
}

}  // namespace tactile
