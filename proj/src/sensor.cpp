#include "tactile/sensor.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tactile/errors.hpp"

namespace tactile {

SensitivityCurve::SensitivityCurve(std::vector<double> breakpoints, std::vector<double> slopes)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
  if (slopes_.empty() || breakpoints_.size() != slopes_.size() + 1) {
    throw ConfigError("sensitivity curve needs one more breakpoint than slopes");
  }
  if (breakpoints_.front() != 0.0) {
    throw ConfigError("sensitivity curve must start at 0 kPa");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw ConfigError("sensitivity breakpoints must be strictly increasing");
    }
  }
  for (double s : slopes_) {
    if (!(s > 0.0)) throw ConfigError("sensitivity slopes must be positive");
  }
}

SensitivityCurve SensitivityCurve::printed_sensor() {
  return SensitivityCurve({0.0, 4.85, 36.28, 150.0}, {31.687, 11.712, 1.481});
}

void SensorConfig::validate() const {
  if (!(r0_ohm > 0.0)) throw ConfigError("sensor r0_ohm must be positive");
  if (!(divider.vcc > 0.0)) throw ConfigError("divider vcc must be positive");
  if (!(divider.r_ref_ohm > 0.0)) throw ConfigError("divider r_ref_ohm must be positive");
  if (!(lag_tau_ms >= 0.0)) throw ConfigError("sensor lag_tau_ms must be >= 0");
}

double current_ratio(double kpa, const SensitivityCurve& curve) {
  if (!(kpa >= 0.0) || kpa > curve.max_pressure()) {
    throw RangeError("pressure " + std::to_string(kpa) + " kPa outside sensor model range [0, " +
                     std::to_string(curve.max_pressure()) + "]");
  }
  const auto& bp = curve.breakpoints();
  const auto& slope = curve.slopes();
  double ratio = 1.0;
  for (std::size_t i = 0; i < slope.size(); ++i) {
    if (kpa <= bp[i]) break;
    double upper = std::min(kpa, bp[i + 1]);
    ratio += slope[i] * (upper - bp[i]);
  }
  return ratio;
}

double resistance(double kpa, double r0_ohm, const SensitivityCurve& curve) {
  return r0_ohm / current_ratio(kpa, curve);
}

double divider_voltage(double r_sensor_ohm, const DividerConfig& cfg) {
  if (!(r_sensor_ohm > 0.0)) throw DomainError("sensor resistance must be positive");
  return cfg.vcc * cfg.r_ref_ohm / (cfg.r_ref_ohm + r_sensor_ohm);
}

double sensitivity_analytic(const SensorGeometry& g) {
  for (double v : {g.r0_ohm, g.displacement_m, g.thickness_m, g.resistivity_ohm_m,
                   g.finger_gap_m, g.pressure_pa}) {
    if (!(v > 0.0)) throw DomainError("sensor geometry fields must be positive");
  }
  double per_pa = g.r0_ohm * g.displacement_m * g.thickness_m /
                  (g.resistivity_ohm_m * g.finger_gap_m * g.pressure_pa);
  return per_pa * 1000.0;
}

double current_ratio_from_voltage(double u, double u0) {
  if (!(u0 > 0.0)) throw DomainError("reference voltage U0 must be positive");
  if (!(u > 0.0)) throw DomainError("voltage U must be positive");
  return u0 / u;
}

double SensorChannel::step(double kpa, double dt_ms) {
  if (!(kpa >= 0.0) || kpa > cfg_->curve.max_pressure()) {
    throw RangeError("pressure " + std::to_string(kpa) + " kPa outside [0, " +
                     std::to_string(cfg_->curve.max_pressure()) + "]");
  }
  if (cfg_->lag_tau_ms > 0.0) {
    filtered_ += (kpa - filtered_) * (1.0 - std::exp(-dt_ms / cfg_->lag_tau_ms));
  } else {
    filtered_ = kpa;
  }
  return divider_voltage(resistance(filtered_, cfg_->r0_ohm, cfg_->curve), cfg_->divider);
}

void validate_frame(const PressureFrame& f, double max_kpa) {
  for (double p : f.kpa) {
    if (!(p >= 0.0) || p > max_kpa) {
      throw RangeError("pressure " + std::to_string(p) + " kPa at t=" + std::to_string(f.t_ms) +
                       " outside [0, " + std::to_string(max_kpa) + "]");
    }
  }
}

VoltageTrace voltage_trace(const PressureTrace& trace, const SensorConfig& cfg, double tick_ms) {
  if (!(tick_ms > 0.0)) throw ConfigError("tick_ms must be positive");
  cfg.validate();
  VoltageTrace out;
  out.tick_ms = tick_ms;
  if (trace.empty()) return out;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (!(trace[i].t_ms > trace[i - 1].t_ms)) {
      throw FormatError("pressure trace timestamps must be strictly increasing (frame " +
                        std::to_string(i) + ")");
    }
  }
  for (const auto& f : trace) validate_frame(f, cfg.curve.max_pressure());

  out.t0_ms = trace.front().t_ms;
  const auto ticks = static_cast<std::size_t>(
      std::floor((trace.back().t_ms - trace.front().t_ms) / tick_ms + 1e-9)) + 1;
  std::vector<SensorChannel> channels(kChannels, SensorChannel(cfg));
  for (auto& v : out.volts) v.reserve(ticks);

  std::size_t frame = 0;
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = out.t0_ms + static_cast<double>(k) * tick_ms;
    while (frame + 1 < trace.size() && trace[frame + 1].t_ms <= t + 1e-9) ++frame;
    for (std::size_t c = 0; c < kChannels; ++c) {
      out.volts[c].push_back(channels[c].step(trace[frame].kpa[c], tick_ms));
    }
  }
  return out;
}

PressureTrace read_pressure_csv(std::istream& in) {
  PressureTrace trace;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("t_ms", 0) == 0) continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw FormatError("pressure CSV line " + std::to_string(lineno) + ": bad number '" +
                          cell + "'");
      }
    }
    if (values.size() != kChannels + 1) {
      throw FormatError("pressure CSV line " + std::to_string(lineno) + ": expected " +
                        std::to_string(kChannels + 1) + " columns");
    }
    PressureFrame f;
    f.t_ms = values[0];
    for (std::size_t c = 0; c < kChannels; ++c) f.kpa[c] = values[c + 1];
    if (!trace.empty() && !(f.t_ms > trace.back().t_ms)) {
      throw FormatError("pressure CSV line " + std::to_string(lineno) +
                        ": timestamps must be strictly increasing");
    }
    trace.push_back(f);
  }
  return trace;
}

void write_pressure_csv(std::ostream& out, const PressureTrace& trace) {
  out << "t_ms";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << ",p" << r << c;
  out << '\n';
  for (const auto& f : trace) {
    out << f.t_ms;
    for (double p : f.kpa) out << ',' << p;
    out << '\n';
  }
}

}  // namespace tactile
