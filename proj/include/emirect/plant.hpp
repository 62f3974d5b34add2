#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "emirect/sensors.hpp"

namespace emirect {

/// Lumped-capacitance thermal plant. The primary node is the controlled
/// volume (e.g. incubator air); the optional coupled node models a slower
/// secondary mass (e.g. abdominal skin) exchanging heat with the primary
/// node only. Forced-air cooling drives the primary node toward ambient.
struct ThermalPlant {
  double heat_capacity_j_per_k = 3500.0;
  double conductance_w_per_k = 5.0;
  double heater_max_w = 75.0;
  double cooler_max_w = 2.5;
  double ambient_c = 25.0;

  struct CoupledNode {
    double heat_capacity_j_per_k = 300.0;
    double conductance_w_per_k = 3.0; // to the primary node
  };
  std::optional<CoupledNode> coupled;

  void validate() const {
    if (heat_capacity_j_per_k <= 0.0 || conductance_w_per_k <= 0.0)
      throw std::domain_error("ThermalPlant: capacity and conductance must be > 0");
    if (heater_max_w < 0.0 || cooler_max_w < 0.0)
      throw std::domain_error("ThermalPlant: actuator powers must be >= 0");
    if (!std::isfinite(ambient_c)) throw std::domain_error("ThermalPlant: ambient must be finite");
    if (coupled && (coupled->heat_capacity_j_per_k <= 0.0 || coupled->conductance_w_per_k <= 0.0))
      throw std::domain_error("ThermalPlant: coupled node parameters must be > 0");
  }

  /// Largest explicit-Euler step the scenario loader accepts.
  double max_stable_dt() const {
    double bound = heat_capacity_j_per_k /
                   (10.0 * (conductance_w_per_k + (coupled ? coupled->conductance_w_per_k : 0.0)));
    if (coupled)
      bound = std::min(bound, coupled->heat_capacity_j_per_k / (10.0 * coupled->conductance_w_per_k));
    return bound;
  }
};

struct NodeTemps {
  double primary_c = 25.0;
  double secondary_c = 25.0; // mirrors primary when the plant has one node
};

struct ActuatorCommand {
  double heater_duty = 0.0;
  double cooler_duty = 0.0;
};

/// One explicit-Euler step of the energy balance.
inline NodeTemps plant_step(const NodeTemps& temps, const ThermalPlant& plant,
                            const ActuatorCommand& cmd, double dt_s) {
  if (dt_s <= 0.0) throw std::domain_error("plant_step: dt must be > 0");
  plant.validate();
  NodeTemps out = temps;
  const double to_ambient = plant.conductance_w_per_k * (temps.primary_c - plant.ambient_c);
  const double cool_sign = (temps.primary_c > plant.ambient_c)   ? 1.0
                           : (temps.primary_c < plant.ambient_c) ? -1.0
                                                                 : 0.0;
  double flux = cmd.heater_duty * plant.heater_max_w -
                cmd.cooler_duty * plant.cooler_max_w * cool_sign - to_ambient;
  if (plant.coupled) {
    const double inter = plant.coupled->conductance_w_per_k * (temps.primary_c - temps.secondary_c);
    flux -= inter;
    out.secondary_c += dt_s * inter / plant.coupled->heat_capacity_j_per_k;
  }
  out.primary_c += dt_s * flux / plant.heat_capacity_j_per_k;
  if (!plant.coupled) out.secondary_c = out.primary_c;
  return out;
}

enum class ControlMode { skin_servocontrol, air_mode };
enum class ControlLaw { on_off, pi };

struct ControllerConfig {
  ControlMode mode = ControlMode::skin_servocontrol;
  double setpoint_c = 36.0;
  ControlLaw law = ControlLaw::pi;
  double hysteresis_band_c = 0.4; // on-off only
  double kp = 1.5;                // PI only, duty per degC
  double ki = 0.004;              // PI only, duty per (degC*s)
  double actuator_slew_w_per_s = 50.0;
  bool safe_mode_on_suspect = false; // hold last command while the detector flags the sensor

  void validate() const {
    if (law == ControlLaw::on_off && hysteresis_band_c <= 0.0)
      throw std::domain_error("ControllerConfig: hysteresis band must be > 0");
    if (law == ControlLaw::pi && (kp <= 0.0 || ki <= 0.0))
      throw std::domain_error("ControllerConfig: PI gains must be > 0");
    if (actuator_slew_w_per_s <= 0.0)
      throw std::domain_error("ControllerConfig: actuator slew must be > 0");
  }
};

struct ControllerState {
  double integral = 0.0; // PI accumulator, in duty units
  ActuatorCommand command;
};

/// Advances the control law one tick and returns the slew-limited actuator
/// command.
inline ActuatorCommand controller_step(double measured_c, const ControllerConfig& cfg,
                                       ControllerState& st, const ThermalPlant& plant,
                                       double dt_s) {
  cfg.validate();
  ActuatorCommand want = st.command;
  if (cfg.law == ControlLaw::on_off) {
    if (measured_c < cfg.setpoint_c - cfg.hysteresis_band_c / 2.0) {
      want.heater_duty = 1.0;
      want.cooler_duty = 0.0;
    } else if (measured_c > cfg.setpoint_c + cfg.hysteresis_band_c / 2.0) {
      want.heater_duty = 0.0;
      want.cooler_duty = plant.cooler_max_w > 0.0 ? 1.0 : 0.0;
    }
    // inside the band: hold previous command
  } else {
    const double err = cfg.setpoint_c - measured_c;
    // anti-windup: hold the integral while the actuator is saturated in the
    // direction the error is pushing
    const double u_unsat = cfg.kp * err + st.integral;
    const bool winding = (u_unsat > 1.0 && err > 0.0) || (u_unsat < -1.0 && err < 0.0);
    if (!winding) st.integral = std::clamp(st.integral + cfg.ki * err * dt_s, -1.0, 1.0);
    const double u = cfg.kp * err + st.integral;
    want.heater_duty = std::clamp(u, 0.0, 1.0);
    want.cooler_duty = std::clamp(-u, 0.0, 1.0);
  }
  const auto slewed = [&](double prev, double next, double max_w) {
    if (max_w <= 0.0) return 0.0;
    const double max_step = cfg.actuator_slew_w_per_s * dt_s / max_w;
    return std::clamp(next, prev - max_step, prev + max_step);
  };
  ActuatorCommand out;
  out.heater_duty = slewed(st.command.heater_duty, want.heater_duty, plant.heater_max_w);
  out.cooler_duty = slewed(st.command.cooler_duty, want.cooler_duty, plant.cooler_max_w);
  st.command = out;
  return out;
}

struct AlarmConfig {
  double preset_deviation_limit_c = 1.0;
  double high_air_limit_c = 38.5;
  bool probe_fault_enabled = true;

  void validate() const {
    if (preset_deviation_limit_c <= 0.0 || high_air_limit_c <= 0.0)
      throw std::domain_error("AlarmConfig: limits must be > 0");
  }
};

struct AlarmSet {
  bool preset_deviation = false;
  bool high_temperature = false;
  bool probe_fault = false;

  bool any() const { return preset_deviation || high_temperature || probe_fault; }

  std::string to_string() const {
    std::string s;
    const auto add = [&s](const char* name) {
      if (!s.empty()) s += '|';
      s += name;
    };
    if (preset_deviation) add("preset_deviation");
    if (high_temperature) add("high_temperature");
    if (probe_fault) add("probe_fault");
    return s;
  }
};

/// Evaluates the alarm predicates on one tick's measurements. Both limits are
/// strict: a deviation of exactly the limit does not alarm.
inline AlarmSet alarm_step(double measured_primary_c, double setpoint_c, double measured_high_c,
                           bool any_sensor_fault, const AlarmConfig& cfg) {
  cfg.validate();
  AlarmSet out;
  out.preset_deviation = std::abs(measured_primary_c - setpoint_c) > cfg.preset_deviation_limit_c;
  out.high_temperature = measured_high_c > cfg.high_air_limit_c;
  out.probe_fault = cfg.probe_fault_enabled && any_sensor_fault;
  return out;
}

enum class Reliability { trusted, suspect };

inline std::string reliability_name(Reliability r) {
  return r == Reliability::trusted ? "trusted" : "suspect";
}

/// Full closed-loop state advanced per tick by the simulation.
struct SystemState {
  double t_s = 0.0;
  NodeTemps actual;
  double measured_primary_c = 0.0; // skin sensor in skin-mode
  double measured_air_c = 0.0;
  double measured_high_c = 0.0;
  FaultKind primary_fault = FaultKind::none;
  ActuatorCommand command;
  AlarmSet alarms;
  Reliability sensor_reliability = Reliability::trusted;
};

} // namespace emirect
