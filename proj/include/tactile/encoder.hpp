#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tactile/sensor.hpp"

namespace tactile {

struct EncoderConfig {
  double v_detect = 1.0;        // below this the channel sleeps
  double pulse_width_ms = 10.0;
  double rf_ohm = 8e3;          // inverting scaler feedback resistor
  double r_ohm = 20e3;          // inverting scaler input resistor
  double v_high = 5.0;          // MCU logic-high level
  double f_max_hw = 250000.0;   // pulses per second the MCU can emit at most
  bool quantize_adc = false;    // floor the 10-bit ADC reading like the MCU

  void validate() const;
  double min_period_ms() const;
};

struct Pulse {
  double t_ms = 0.0;
  double amplitude = 0.0;  // volts, negative at the transistor gate
  double width_ms = 0.0;
};

struct PulseTrain {
  std::size_t channel = 0;
  std::vector<Pulse> pulses;
};

// Oscillator period for an input voltage in [0, 5] V:
// 1000/f = 512 - 0.412 * (1024 * V / 5).
double period_ms(double v_in, bool quantize_adc = false);

// Inverse of period_ms on the real-valued branch.
double voltage_for_period(double period_ms);

// Inverting amplifier: -(Rf/R) * V.
double scale_amplitude(double v_pulse, const EncoderConfig& cfg);

// Event-driven pulse generator for one channel. The next onset is scheduled
// from the previous one using the period evaluated at the emission tick;
// falling below the detection limit puts the channel to sleep and discards
// the phase.
class SpikeOscillator {
 public:
  explicit SpikeOscillator(const EncoderConfig& cfg) : cfg_(&cfg) {}

  std::optional<Pulse> tick(double t_ms, double v_in);
  double gate(double t_ms) const noexcept { return t_ms < pulse_end_ms_ ? amplitude_ : 0.0; }
  bool awake() const noexcept { return awake_; }

 private:
  const EncoderConfig* cfg_;
  bool awake_ = false;
  double next_ms_ = 0.0;
  double pulse_end_ms_ = -1.0;
  double amplitude_ = 0.0;
};

std::array<PulseTrain, kChannels> encode_trace(const VoltageTrace& trace, const EncoderConfig& cfg);

// One pulse per line: {"channel":c,"t_ms":t,"amplitude":a,"width_ms":w}
void write_pulses_jsonl(std::ostream& out, const std::array<PulseTrain, kChannels>& trains);

}  // namespace tactile
