#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace tactile {

inline constexpr std::size_t kChannels = 9;  // 3x3 array, row-major

using Grid = std::array<double, kChannels>;

// Piecewise-linear current-ratio curve. Segment i spans
// [breakpoints[i], breakpoints[i+1]] with slope slopes[i] (kPa^-1), so there is
// one more breakpoint than slopes and the last breakpoint is the model's upper
// pressure limit.
class SensitivityCurve {
 public:
  SensitivityCurve(std::vector<double> breakpoints, std::vector<double> slopes);

  // Three-segment fit of the printed sensor: 31.687 / 11.712 / 1.481 kPa^-1
  // over [0, 4.85], (4.85, 36.28], (36.28, 150] kPa.
  static SensitivityCurve printed_sensor();

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& slopes() const noexcept { return slopes_; }
  double max_pressure() const noexcept { return breakpoints_.back(); }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
};

// Geometry terms of the interdigital sensitivity expression, all SI.
struct SensorGeometry {
  double r0_ohm = 1.0;
  double displacement_m = 1.0;
  double thickness_m = 1.0;
  double resistivity_ohm_m = 1.0;
  double finger_gap_m = 1.0;
  double pressure_pa = 1.0;
};

// Sensor on the high side, reference resistor to ground: the output rises as
// the sensor resistance falls.
struct DividerConfig {
  double vcc = 5.0;
  double r_ref_ohm = 10e3;
};

struct SensorConfig {
  SensitivityCurve curve = SensitivityCurve::printed_sensor();
  double r0_ohm = 500e3;
  DividerConfig divider;
  double lag_tau_ms = 30.0;  // 0 disables the response lag

  void validate() const;
};

struct PressureFrame {
  double t_ms = 0.0;
  Grid kpa{};
};

using PressureTrace = std::vector<PressureFrame>;

// Per-channel samples on a uniform tick grid starting at t0_ms.
struct VoltageTrace {
  double t0_ms = 0.0;
  double tick_ms = 1.0;
  std::array<std::vector<double>, kChannels> volts;

  std::size_t size() const noexcept { return volts[0].size(); }
};

double current_ratio(double kpa, const SensitivityCurve& curve);
double resistance(double kpa, double r0_ohm, const SensitivityCurve& curve);
double divider_voltage(double r_sensor_ohm, const DividerConfig& cfg);

// S = R0 h t / (rho d0 P), returned in kPa^-1.
double sensitivity_analytic(const SensorGeometry& g);

// I/I0 = U0/U for a measurement taken under constant current.
double current_ratio_from_voltage(double u, double u0);

// Pressure-to-voltage chain for one channel, including the response lag.
class SensorChannel {
 public:
  explicit SensorChannel(const SensorConfig& cfg) : cfg_(&cfg) {}

  double step(double kpa, double dt_ms);
  double filtered_kpa() const noexcept { return filtered_; }

 private:
  const SensorConfig* cfg_;
  double filtered_ = 0.0;
};

// Samples a zero-order-hold pressure trace every tick from the first to the
// last frame timestamp.
VoltageTrace voltage_trace(const PressureTrace& trace, const SensorConfig& cfg, double tick_ms);

void validate_frame(const PressureFrame& f, double max_kpa);

// CSV with header t_ms,p00,p01,...,p22.
PressureTrace read_pressure_csv(std::istream& in);
void write_pressure_csv(std::ostream& out, const PressureTrace& trace);

}  // namespace tactile
