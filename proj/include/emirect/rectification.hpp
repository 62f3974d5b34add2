#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "emirect/propagation.hpp"
#include "emirect/sensors.hpp"
#include "emirect/units.hpp"

namespace emirect {

/// BJT input-stage bias parameters for the rectified collector-current shift.
struct BjtAmpParams {
  double quiescent_collector_current_a = 1e-3;
  double thermal_voltage_v = 0.02568; // at 25 C
  double equivalent_resistance_ohm = 50.0;

  void validate() const {
    if (quiescent_collector_current_a <= 0.0 || thermal_voltage_v <= 0.0 ||
        equivalent_resistance_ohm <= 0.0)
      throw std::domain_error("BjtAmpParams: all parameters must be > 0");
  }
};

/// FET input-stage parameters for the drain-current analogue.
struct FetAmpParams {
  double zero_bias_drain_current_a = 2e-3; // I_DSS
  double pinch_off_voltage_v = -2.0;       // V_P, nonzero
  double equivalent_resistance_ohm = 50.0;

  void validate() const {
    if (zero_bias_drain_current_a <= 0.0) throw std::domain_error("FetAmpParams: I_DSS must be > 0");
    if (pinch_off_voltage_v == 0.0) throw std::domain_error("FetAmpParams: V_P must be nonzero");
    if (equivalent_resistance_ohm <= 0.0)
      throw std::domain_error("FetAmpParams: resistance must be > 0");
  }
};

using AmpParams = std::variant<BjtAmpParams, FetAmpParams>;

/// Rectified DC collector-current shift for an injected AC amplitude v_emi:
/// (v/V_T)^2 * I_C / 4.
inline double bjt_dc_current_shift(double v_emi_v, const BjtAmpParams& p) {
  if (v_emi_v < 0.0) throw std::domain_error("bjt_dc_current_shift: amplitude must be >= 0");
  p.validate();
  const double r = v_emi_v / p.thermal_voltage_v;
  return r * r * p.quiescent_collector_current_a / 4.0;
}

/// FET analogue: (v/V_P)^2 * I_DSS / 2.
inline double fet_dc_current_shift(double v_emi_v, const FetAmpParams& p) {
  if (v_emi_v < 0.0) throw std::domain_error("fet_dc_current_shift: amplitude must be >= 0");
  p.validate();
  const double r = v_emi_v / std::abs(p.pinch_off_voltage_v);
  return r * r * p.zero_bias_drain_current_a / 2.0;
}

/// Unsaturated DC offset for injected power p: (R_r/V_T)^2 * (I_C/4) * p.
inline double dc_offset_from_power(double p_injected_w, const BjtAmpParams& p) {
  if (p_injected_w < 0.0) throw std::domain_error("dc_offset_from_power: power must be >= 0");
  p.validate();
  const double r = p.equivalent_resistance_ohm / p.thermal_voltage_v;
  return r * r * p.quiescent_collector_current_a / 4.0 * p_injected_w;
}

inline double dc_offset_from_power(double p_injected_w, const FetAmpParams& p) {
  if (p_injected_w < 0.0) throw std::domain_error("dc_offset_from_power: power must be >= 0");
  p.validate();
  const double r = p.equivalent_resistance_ohm / std::abs(p.pinch_off_voltage_v);
  return r * r * p.zero_bias_drain_current_a / 2.0 * p_injected_w;
}

inline double dc_offset_from_power(double p_injected_w, const AmpParams& p) {
  return std::visit([p_injected_w](const auto& a) { return dc_offset_from_power(p_injected_w, a); },
                    p);
}

/// Offset magnitude below linear_limit maps through unchanged; beyond it the
/// incremental slope tapers off, bounding the output by linear_limit + shape.
struct SaturationModel {
  double linear_limit_v = 1.0;
  double shape_v = 4.0;

  void validate() const {
    if (linear_limit_v <= 0.0 || shape_v <= 0.0)
      throw std::domain_error("SaturationModel: parameters must be > 0");
  }
  double ceiling() const { return linear_limit_v + shape_v; }
};

/// Odd, strictly increasing compression of the linear power->offset map.
/// Exactly linear within +-linear_limit, tanh-tapered beyond.
inline double apply_saturation(double linear_offset_v, const SaturationModel& m) {
  m.validate();
  const double mag = std::abs(linear_offset_v);
  const double out = (mag <= m.linear_limit_v)
                         ? mag
                         : m.linear_limit_v +
                               m.shape_v * std::tanh((mag - m.linear_limit_v) / m.shape_v);
  return std::copysign(out, linear_offset_v);
}

/// Inverse of apply_saturation. Magnitudes at or above the saturation ceiling
/// are unreachable and return +infinity.
inline double saturation_inverse(double offset_v, const SaturationModel& m) {
  m.validate();
  const double mag = std::abs(offset_v);
  double lin;
  if (mag <= m.linear_limit_v) {
    lin = mag;
  } else if (mag >= m.ceiling()) {
    lin = std::numeric_limits<double>::infinity();
  } else {
    lin = m.linear_limit_v + m.shape_v * std::atanh((mag - m.linear_limit_v) / m.shape_v);
  }
  return std::copysign(lin, offset_v);
}

enum class CouplingMode { radiated, conducted };

/// Calibration point: an observed temperature shift at a known frequency,
/// power and (for radiated coupling) distance.
struct SusceptibilityAnchor {
  CouplingMode mode = CouplingMode::radiated;
  double distance_m = 1.0; // ignored for conducted anchors
  double tx_power_w = 4.0; // radiated: transmit power; conducted: injected power
  double frequency_hz = 0.0;
  double observed_delta_t_c = 0.0;
  double base_temp_c = 25.0;
  double solved_coupling = 0.0; // signed, set by calibrate_profile
  bool calibrated = false;
};

struct ProfileEntry {
  double frequency_hz = 0.0;
  double coupling = 0.0; // signed; magnitude = fraction of received power rectified
};

/// Per-device frequency->coupling map. `entries` is the materialized table
/// used by offset_at; it is rebuilt from the anchors nearest in distance when
/// the profile is specialized for a given attack geometry. `fixed_entries`
/// are absolute couplings that survive specialization unchanged (used for
/// effects with no delta-T anchor, e.g. fault-inducing bands).
struct SusceptibilityProfile {
  std::string device_id;
  std::vector<ProfileEntry> entries;
  std::vector<SusceptibilityAnchor> anchors;
  std::vector<ProfileEntry> fixed_entries;
  double lobe_width_hz = 40e6;
  AmpParams amp = BjtAmpParams{};
  SaturationModel saturation;

  void validate() const {
    saturation.validate();
    std::visit([](const auto& a) { a.validate(); }, amp);
    if (anchors.empty())
      throw std::domain_error("SusceptibilityProfile " + device_id + ": needs at least one anchor");
    for (std::size_t i = 0; i + 1 < entries.size(); ++i)
      if (!(entries[i].frequency_hz < entries[i + 1].frequency_hz))
        throw std::domain_error("SusceptibilityProfile " + device_id +
                                ": entries must be sorted by frequency without duplicates");
    for (const auto& e : entries)
      if (std::abs(e.coupling) > 1.0)
        throw std::domain_error("SusceptibilityProfile " + device_id + ": |coupling| must be <= 1");
  }
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Signed coupling linearly interpolated at `freq_hz`; empty when the
/// frequency lies outside the profile's tabulated band.
inline std::optional<double> coupling_at(const SusceptibilityProfile& p, double freq_hz) {
  if (p.entries.empty()) return std::nullopt;
  if (freq_hz < p.entries.front().frequency_hz || freq_hz > p.entries.back().frequency_hz)
    return std::nullopt;
  auto hi = std::lower_bound(p.entries.begin(), p.entries.end(), freq_hz,
                             [](const ProfileEntry& e, double f) { return e.frequency_hz < f; });
  if (hi->frequency_hz == freq_hz) return hi->coupling;
  auto lo = hi - 1;
  const double w = (freq_hz - lo->frequency_hz) / (hi->frequency_hz - lo->frequency_hz);
  return lo->coupling + w * (hi->coupling - lo->coupling);
}

/// A rectified offset sample. `in_band` is false when the query frequency lay
/// outside the profile's entry range (coupling assumed negligible, 0 V).
struct OffsetSample {
  double volts = 0.0;
  bool in_band = false;
};

/// Signed, saturated DC offset induced at the amplifier output by
/// `p_received_w` watts arriving at the device at `freq_hz`.
inline OffsetSample offset_at(const SusceptibilityProfile& p, double freq_hz, double p_received_w) {
  if (p_received_w < 0.0) throw std::domain_error("offset_at: received power must be >= 0");
  const auto c = coupling_at(p, freq_hz);
  if (!c) return {0.0, false};
  const double injected = std::abs(*c) * p_received_w;
  const double lin = dc_offset_from_power(injected, p.amp);
  const double mag = apply_saturation(lin, p.saturation);
  return {std::copysign(mag, *c), true};
}

struct SweepPoint {
  double frequency_hz = 0.0;
  double dc_offset_v = 0.0;
};

/// Conducted-injection sweep: tabulates offset_at over a frequency grid with
/// a fixed injected power, bypassing propagation.
inline std::vector<SweepPoint> dpi_sweep(const SusceptibilityProfile& p, double f_start_hz,
                                         double f_end_hz, double step_hz, double p_inject_w) {
  if (!(f_start_hz < f_end_hz)) throw std::domain_error("dpi_sweep: need f_start < f_end");
  if (step_hz <= 0.0) throw std::domain_error("dpi_sweep: step must be > 0");
  std::vector<SweepPoint> out;
  for (double f = f_start_hz; f <= f_end_hz + step_hz * 1e-9; f += step_hz)
    out.push_back({f, offset_at(p, f, p_inject_w).volts});
  if (out.empty()) throw std::domain_error("dpi_sweep: empty grid");
  return out;
}

namespace detail {

/// Rebuilds the piecewise-linear entry table from a set of signed peaks:
/// triangular lobes of half-width `lobe_w` around each peak, single zero
/// crossing between close opposite-sign peaks, linear blend between close
/// same-sign peaks.
inline std::vector<ProfileEntry> materialize_entries(std::vector<ProfileEntry> peaks,
                                                     double lobe_w) {
  std::sort(peaks.begin(), peaks.end(),
            [](const ProfileEntry& a, const ProfileEntry& b) { return a.frequency_hz < b.frequency_hz; });
  std::vector<ProfileEntry> pts;
  if (peaks.empty()) return pts;
  const auto push = [&pts](double f, double c) {
    if (f <= 0.0) return;
    for (const auto& q : pts)
      if (q.frequency_hz == f) return; // first writer wins (peaks are pushed first)
    pts.push_back({f, c});
  };
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    push(peaks[i].frequency_hz, peaks[i].coupling);
    if (i == 0) push(peaks[i].frequency_hz - lobe_w, 0.0);
    if (i + 1 == peaks.size()) {
      push(peaks[i].frequency_hz + lobe_w, 0.0);
    } else {
      const double gap = peaks[i + 1].frequency_hz - peaks[i].frequency_hz;
      if (gap >= 2.0 * lobe_w) {
        push(peaks[i].frequency_hz + lobe_w, 0.0);
        push(peaks[i + 1].frequency_hz - lobe_w, 0.0);
      } else if ((peaks[i].coupling < 0.0) != (peaks[i + 1].coupling < 0.0)) {
        push(peaks[i].frequency_hz + gap / 2.0, 0.0);
      }
      // close same-sign peaks blend linearly, no inserted zero
    }
  }
  std::sort(pts.begin(), pts.end(),
            [](const ProfileEntry& a, const ProfileEntry& b) { return a.frequency_hz < b.frequency_hz; });
  return pts;
}

inline std::string anchor_label(const SusceptibilityAnchor& a) {
  return "(f=" + std::to_string(a.frequency_hz / 1e6) + " MHz, P=" + std::to_string(a.tx_power_w) +
         " W, D=" + std::to_string(a.distance_m) + " m, dT=" +
         std::to_string(a.observed_delta_t_c) + " C)";
}

} // namespace detail

/// Power available at the rectifying junction's device for an anchor:
/// free-space propagation for radiated anchors, the injected power itself for
/// conducted ones.
inline double anchor_available_power(const SusceptibilityAnchor& a) {
  if (a.mode == CouplingMode::conducted) return a.tx_power_w;
  return friis_received_power(a.frequency_hz, a.tx_power_w, a.distance_m);
}

/// Rebuilds `entries` from the calibrated anchor group nearest in distance to
/// `distance_m`. Conducted anchors form a single group of their own, selected
/// by conducted mode. Fixed entries are merged in unchanged.
inline SusceptibilityProfile specialize_for_distance(SusceptibilityProfile profile,
                                                     double distance_m,
                                                     CouplingMode mode = CouplingMode::radiated) {
  std::vector<ProfileEntry> peaks;
  if (mode == CouplingMode::conducted) {
    for (const auto& a : profile.anchors)
      if (a.mode == CouplingMode::conducted && a.calibrated)
        peaks.push_back({a.frequency_hz, a.solved_coupling});
  } else {
    double best_diff = std::numeric_limits<double>::infinity();
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& a : profile.anchors) {
      if (a.mode != CouplingMode::radiated || !a.calibrated) continue;
      const double diff = std::abs(a.distance_m - distance_m);
      if (diff < best_diff || (diff == best_diff && a.distance_m < best_dist)) {
        best_diff = diff;
        best_dist = a.distance_m;
      }
    }
    for (const auto& a : profile.anchors)
      if (a.mode == CouplingMode::radiated && a.calibrated && a.distance_m == best_dist)
        peaks.push_back({a.frequency_hz, a.solved_coupling});
  }
  for (const auto& e : profile.fixed_entries) peaks.push_back(e);
  profile.entries = detail::materialize_entries(std::move(peaks), profile.lobe_width_hz);
  return profile;
}

/// Solves each anchor's signed coupling so the simulated reading shift at the
/// anchor's operating point reproduces the observed delta-T, then rebuilds the
/// entry table for the anchor group nearest `reference_distance_m` (default:
/// the profile's closest radiated anchor). Deterministic; throws
/// CalibrationError when an anchor would require |coupling| > 1 or an offset
/// beyond the saturation ceiling.
inline SusceptibilityProfile calibrate_profile(
    SusceptibilityProfile profile, const SensorModel& sensor,
    std::optional<double> reference_distance_m = std::nullopt) {
  if (profile.anchors.empty())
    throw CalibrationError("calibrate_profile: profile " + profile.device_id + " has no anchors");
  for (auto& a : profile.anchors) {
    if (a.observed_delta_t_c == 0.0) {
      a.solved_coupling = 0.0;
      a.calibrated = true;
      continue;
    }
    const double v_base = temp_to_voltage(sensor, a.base_temp_c);
    const double v_target = temp_to_voltage(sensor, a.base_temp_c + a.observed_delta_t_c);
    const double needed_offset = v_target - v_base;
    const double lin = saturation_inverse(needed_offset, profile.saturation);
    if (!std::isfinite(lin))
      throw CalibrationError("calibrate_profile: anchor " + detail::anchor_label(a) + " of " +
                             profile.device_id + " needs an offset beyond the saturation ceiling");
    const double unit_offset = dc_offset_from_power(1.0, profile.amp);
    const double p_needed = std::abs(lin) / unit_offset;
    const double p_avail = anchor_available_power(a);
    if (p_avail <= 0.0)
      throw CalibrationError("calibrate_profile: anchor " + detail::anchor_label(a) + " of " +
                             profile.device_id + " has no available power");
    const double mag = p_needed / p_avail;
    if (mag > 1.0)
      throw CalibrationError("calibrate_profile: anchor " + detail::anchor_label(a) + " of " +
                             profile.device_id + " is infeasible (required coupling " +
                             std::to_string(mag) + " > 1)");
    a.solved_coupling = std::copysign(mag, needed_offset);
    a.calibrated = true;
  }
  bool any_radiated = false;
  for (const auto& a : profile.anchors)
    if (a.mode == CouplingMode::radiated) any_radiated = true;
  if (!any_radiated)
    return specialize_for_distance(std::move(profile), 0.0, CouplingMode::conducted);
  double ref = 0.0;
  if (reference_distance_m) {
    ref = *reference_distance_m;
  } else {
    ref = std::numeric_limits<double>::infinity();
    for (const auto& a : profile.anchors)
      if (a.mode == CouplingMode::radiated) ref = std::min(ref, a.distance_m);
  }
  return specialize_for_distance(std::move(profile), ref);
}

} // namespace emirect
