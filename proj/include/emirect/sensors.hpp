#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "emirect/units.hpp"

namespace emirect {

enum class ThermistorPolarity { ntc, ptc };

/// B-parameter thermistor read through a Wheatstone bridge and an op-amp
/// gain stage. The bridge connects the thermistor against r1 on one leg and
/// r2/r3 on the reference leg; the differential voltage is amplified.
struct ThermistorModel {
  double r0_ohm = 2252.0;        // resistance at t0
  double t0_k = 298.15;          // reference temperature
  double beta_k = 3977.0;        // B parameter
  double bridge_excitation_v = 5.0;
  double bridge_r1_ohm = 2252.0; // in series with the thermistor
  double bridge_r2_ohm = 2252.0;
  double bridge_r3_ohm = 2252.0;
  double amp_gain = 5.0;
  ThermistorPolarity polarity = ThermistorPolarity::ntc;
  double range_min_c = -40.0;
  double range_max_c = 150.0;

  double resistance_at(double temp_c) const {
    const double inv_dt = 1.0 / celsius_to_kelvin(temp_c) - 1.0 / t0_k;
    const double expo = (polarity == ThermistorPolarity::ntc) ? beta_k * inv_dt : -beta_k * inv_dt;
    return r0_ohm * std::exp(expo);
  }
};

/// Linearized thermocouple with cold-junction compensation folded into the
/// reference temperature.
struct ThermocoupleModel {
  double seebeck_v_per_k = 41e-6; // K-type
  double cjc_reference_c = 25.0;
  double amp_gain = 122.0;
  bool shielded = false; // affects susceptibility coupling only, not the transfer function
  double range_min_c = -200.0;
  double range_max_c = 1350.0;
};

/// Current-excited RTD with the linear alpha approximation.
struct RtdModel {
  double r0_ohm = 100.0; // at 0 C (PT100)
  double alpha_per_k = 0.00385;
  double excitation_a = 1e-3;
  double amp_gain = 10.0;
  double range_min_c = -50.0;
  double range_max_c = 450.0;
};

using SensorModel = std::variant<ThermistorModel, ThermocoupleModel, RtdModel>;

struct AdcModel {
  int resolution_bits = 16;
  double v_ref = 5.0;
  double valid_min_v = -4.9; // below: open-circuit fault
  double valid_max_v = 4.9;  // above: short-circuit fault

  void validate() const {
    if (resolution_bits < 8 || resolution_bits > 24)
      throw std::domain_error("AdcModel: resolution must be in [8,24] bits");
    if (!(valid_min_v < valid_max_v && valid_max_v <= v_ref))
      throw std::domain_error("AdcModel: require valid_min < valid_max <= v_ref");
  }

  double lsb() const { return v_ref / static_cast<double>(1 << resolution_bits); }
  double quantize(double v) const {
    const double step = lsb();
    return std::clamp(std::round(v / step) * step, -v_ref, v_ref);
  }
};

enum class FaultKind { none, open_circuit, short_circuit, out_of_range };

inline std::string fault_name(FaultKind f) {
  switch (f) {
    case FaultKind::none: return "none";
    case FaultKind::open_circuit: return "open_circuit";
    case FaultKind::short_circuit: return "short_circuit";
    case FaultKind::out_of_range: return "out_of_range";
  }
  return "none";
}

/// A digitized reading. When fault != none the reported temperature is the
/// device's fault sentinel (0 C, matching the observed extruder behavior).
struct SensorReading {
  double reported_temp_c = 0.0;
  double raw_voltage_v = 0.0;
  FaultKind fault = FaultKind::none;
};

namespace detail {

inline void check_range(double temp_c, double lo, double hi, const char* family) {
  if (temp_c < lo || temp_c > hi)
    throw std::domain_error(std::string(family) + ": temperature outside operating range");
}

inline double bridge_reference_ratio(const ThermistorModel& m) {
  return m.bridge_r3_ohm / (m.bridge_r2_ohm + m.bridge_r3_ohm);
}

} // namespace detail

inline double temp_to_voltage(const ThermistorModel& m, double temp_c) {
  detail::check_range(temp_c, m.range_min_c, m.range_max_c, "thermistor");
  const double rt = m.resistance_at(temp_c);
  const double ratio = rt / (m.bridge_r1_ohm + rt) - detail::bridge_reference_ratio(m);
  return m.bridge_excitation_v * ratio * m.amp_gain;
}

inline double temp_to_voltage(const ThermocoupleModel& m, double temp_c) {
  detail::check_range(temp_c, m.range_min_c, m.range_max_c, "thermocouple");
  return m.seebeck_v_per_k * (temp_c - m.cjc_reference_c) * m.amp_gain;
}

inline double temp_to_voltage(const RtdModel& m, double temp_c) {
  detail::check_range(temp_c, m.range_min_c, m.range_max_c, "rtd");
  return m.excitation_a * m.r0_ohm * (1.0 + m.alpha_per_k * temp_c) * m.amp_gain;
}

inline double temp_to_voltage(const SensorModel& m, double temp_c) {
  return std::visit([temp_c](const auto& s) { return temp_to_voltage(s, temp_c); }, m);
}

inline double voltage_to_temp(const ThermistorModel& m, double v) {
  const double x = v / (m.amp_gain * m.bridge_excitation_v) + detail::bridge_reference_ratio(m);
  if (x <= 0.0 || x >= 1.0) throw std::domain_error("thermistor: voltage outside invertible range");
  const double rt = x * m.bridge_r1_ohm / (1.0 - x);
  const double log_r = std::log(rt / m.r0_ohm);
  const double expo = (m.polarity == ThermistorPolarity::ntc) ? log_r : -log_r;
  const double inv_t = 1.0 / m.t0_k + expo / m.beta_k;
  if (inv_t <= 0.0) throw std::domain_error("thermistor: voltage outside invertible range");
  return kelvin_to_celsius(1.0 / inv_t);
}

inline double voltage_to_temp(const ThermocoupleModel& m, double v) {
  return m.cjc_reference_c + v / (m.seebeck_v_per_k * m.amp_gain);
}

inline double voltage_to_temp(const RtdModel& m, double v) {
  const double denom = m.excitation_a * m.r0_ohm * m.amp_gain;
  return (v / denom - 1.0) / m.alpha_per_k;
}

inline double voltage_to_temp(const SensorModel& m, double v) {
  return std::visit([v](const auto& s) { return voltage_to_temp(s, v); }, m);
}

/// Digitizes temp_to_voltage(true_temp) + dc_offset and converts back the way
/// the victim firmware does. Out-of-range raw voltages become probe faults
/// with a 0 C sentinel instead of temperatures.
inline SensorReading read(const SensorModel& m, const AdcModel& adc, double true_temp_c,
                          double dc_offset_v) {
  adc.validate();
  SensorReading out;
  const double raw = temp_to_voltage(m, true_temp_c) + dc_offset_v;
  out.raw_voltage_v = adc.quantize(raw);
  if (out.raw_voltage_v < adc.valid_min_v) {
    out.fault = FaultKind::open_circuit;
    out.reported_temp_c = 0.0;
    return out;
  }
  if (out.raw_voltage_v > adc.valid_max_v) {
    out.fault = FaultKind::short_circuit;
    out.reported_temp_c = 0.0;
    return out;
  }
  try {
    out.reported_temp_c = voltage_to_temp(m, out.raw_voltage_v);
  } catch (const std::domain_error&) {
    out.fault = FaultKind::out_of_range;
    out.reported_temp_c = 0.0;
  }
  return out;
}

inline double sensor_range_min(const SensorModel& m) {
  return std::visit([](const auto& s) { return s.range_min_c; }, m);
}
inline double sensor_range_max(const SensorModel& m) {
  return std::visit([](const auto& s) { return s.range_max_c; }, m);
}

} // namespace emirect
