#include "tactile/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "tactile/errors.hpp"

namespace tactile {

namespace {
constexpr double kBasePeriodMs = 512.0;
constexpr double kPeriodSlope = 0.412;
constexpr double kAdcCounts = 1024.0;
constexpr double kAdcFullScale = 5.0;
constexpr double kTimeEps = 1e-9;
}  // namespace

double period_ms(double v_in, bool quantize_adc) {
  if (!(v_in >= 0.0 && v_in <= kAdcFullScale)) {
    throw DomainError("encoder input " + std::to_string(v_in) + " V outside [0, 5]");
  }
  double adc = kAdcCounts * v_in / kAdcFullScale;
  if (quantize_adc) adc = std::min(std::floor(adc), kAdcCounts - 1.0);
  return kBasePeriodMs - kPeriodSlope * adc;
}

double voltage_for_period(double period) {
  double v = (kBasePeriodMs - period) * kAdcFullScale / (kPeriodSlope * kAdcCounts);
  if (!(v >= 0.0 && v <= kAdcFullScale)) {
    throw DomainError("period " + std::to_string(period) + " ms not reachable by the encoder");
  }
  return v;
}

double scale_amplitude(double v_pulse, const EncoderConfig& cfg) {
  if (!(cfg.rf_ohm > 0.0 && cfg.r_ohm > 0.0)) {
    throw ConfigError("scaler resistances must be positive");
  }
  return -(cfg.rf_ohm / cfg.r_ohm) * v_pulse;
}

double EncoderConfig::min_period_ms() const {
  return std::max(period_ms(kAdcFullScale, quantize_adc), 1000.0 / f_max_hw);
}

void EncoderConfig::validate() const {
  if (!(v_detect >= 0.0 && v_detect < v_high)) {
    throw ConfigError("encoder v_detect must lie in [0, v_high)");
  }
  if (!(rf_ohm > 0.0 && r_ohm > 0.0)) throw ConfigError("scaler resistances must be positive");
  if (!(f_max_hw > 0.0)) throw ConfigError("encoder f_max_hw must be positive");
  if (!(pulse_width_ms > 0.0 && pulse_width_ms < min_period_ms())) {
    throw ConfigError("encoder pulse_width_ms must be positive and below the minimum period");
  }
}

std::optional<Pulse> SpikeOscillator::tick(double t_ms, double v_in) {
  if (v_in < cfg_->v_detect) {
    awake_ = false;
    return std::nullopt;
  }
  if (!awake_) {
    awake_ = true;
    next_ms_ = std::max(t_ms, pulse_end_ms_);
  }
  if (t_ms + kTimeEps < next_ms_) return std::nullopt;

  const double v = std::min(v_in, kAdcFullScale);
  const double period = std::max(period_ms(v, cfg_->quantize_adc), 1000.0 / cfg_->f_max_hw);
  next_ms_ += period;
  amplitude_ = scale_amplitude(cfg_->v_high, *cfg_);
  pulse_end_ms_ = t_ms + cfg_->pulse_width_ms;
  return Pulse{t_ms, amplitude_, cfg_->pulse_width_ms};
}

std::array<PulseTrain, kChannels> encode_trace(const VoltageTrace& trace, const EncoderConfig& cfg) {
  cfg.validate();
  if (!(trace.tick_ms > 0.0)) throw ConfigError("tick_ms must be positive");
  if (trace.tick_ms > cfg.min_period_ms()) {
    throw ConfigError("tick " + std::to_string(trace.tick_ms) +
                      " ms is coarser than the minimum pulse period");
  }
  std::array<PulseTrain, kChannels> out;
  for (std::size_t c = 0; c < kChannels; ++c) {
    out[c].channel = c;
    SpikeOscillator osc(cfg);
    const auto& v = trace.volts[c];
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double t = trace.t0_ms + static_cast<double>(k) * trace.tick_ms;
      if (auto p = osc.tick(t, v[k])) out[c].pulses.push_back(*p);
    }
  }
  return out;
}

void write_pulses_jsonl(std::ostream& out, const std::array<PulseTrain, kChannels>& trains) {
  for (const auto& train : trains) {
    for (const auto& p : train.pulses) {
      nlohmann::json j{{"channel", train.channel},
                       {"t_ms", p.t_ms},
                       {"amplitude", p.amplitude},
                       {"width_ms", p.width_ms}};
      out << j.dump() << '\n';
    }
  }
}

}  // namespace tactile
