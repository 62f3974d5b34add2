#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emirect/scenario_io.hpp"

namespace emirect {

/// What the adversary can see: the victim's front-panel reading.
struct DisplayedReading {
  double temp_c = 0.0;
  bool fault = false;
};

/// The only surface the threat model grants the adversary: observe the
/// displayed temperature, key the transmitter, and let time pass. Attacker
/// procedures never touch victim internals.
class VictimChannel {
 public:
  virtual ~VictimChannel() = default;
  virtual DisplayedReading observe() = 0;
  virtual void transmit(double freq_hz, double amplitude) = 0; // amplitude in [0,1]
  virtual void wait(double seconds) = 0;
  virtual double tick_seconds() const = 0;
  virtual double time_s() const = 0;
  virtual bool expired() const = 0;
};

struct SweepCandidate {
  double frequency_hz = 0.0;
  double delta_t_c = 0.0; // signed observed reading shift at full budget
};

/// One dwell per grid frequency at full budget, reading shift measured
/// against the just-before baseline. Candidates are ranked by |shift|
/// descending (ties to the lower frequency); shifts inside the display noise
/// gate are dropped. Faulted readings are not temperature shifts and are
/// skipped.
inline std::vector<SweepCandidate> coarse_sweep(const AttackerScenarioConfig& cfg,
                                                VictimChannel& victim) {
  std::vector<SweepCandidate> out;
  if (cfg.power_budget_w <= 0.0) return out;
  const double gate = 2.0 * cfg.feedback_resolution_c;
  for (double f = cfg.freq_lo_hz; f <= cfg.freq_hi_hz && !victim.expired();
       f += cfg.coarse_step_hz) {
    const DisplayedReading before = victim.observe();
    victim.transmit(f, 1.0);
    victim.wait(cfg.dwell_s);
    const DisplayedReading during = victim.observe();
    victim.transmit(f, 0.0);
    victim.wait(cfg.dwell_s);
    if (before.fault || during.fault) continue;
    const double dt = during.temp_c - before.temp_c;
    if (std::abs(dt) >= gate) out.push_back({f, dt});
  }
  std::sort(out.begin(), out.end(), [](const SweepCandidate& a, const SweepCandidate& b) {
    if (std::abs(a.delta_t_c) != std::abs(b.delta_t_c))
      return std::abs(a.delta_t_c) > std::abs(b.delta_t_c);
    return a.frequency_hz < b.frequency_hz;
  });
  return out;
}

/// Scans +-coarse_step around a coarse candidate at fine_step resolution and
/// returns the frequency of the largest reading shift. Deterministic
/// tie-break to the lower frequency.
inline double fine_tune(const AttackerScenarioConfig& cfg, VictimChannel& victim,
                        double center_hz) {
  double best_f = center_hz;
  double best_dt = 0.0;
  const double lo = std::max(cfg.freq_lo_hz, center_hz - cfg.coarse_step_hz);
  const double hi = std::min(cfg.freq_hi_hz, center_hz + cfg.coarse_step_hz);
  for (double f = lo; f <= hi && !victim.expired(); f += cfg.fine_step_hz) {
    const DisplayedReading before = victim.observe();
    victim.transmit(f, 1.0);
    victim.wait(cfg.dwell_s);
    const DisplayedReading during = victim.observe();
    victim.transmit(f, 0.0);
    victim.wait(cfg.dwell_s);
    if (before.fault || during.fault) continue;
    const double dt = during.temp_c - before.temp_c;
    if (std::abs(dt) > std::abs(best_dt)) {
      best_dt = dt;
      best_f = f;
    }
  }
  return best_f;
}

/// Result of a tuning session: best positive and negative carriers with the
/// full-budget reading shift each induces.
struct AttackTuning {
  std::optional<SweepCandidate> positive;
  std::optional<SweepCandidate> negative;
};

inline AttackTuning tune(const AttackerScenarioConfig& cfg, VictimChannel& victim) {
  AttackTuning tuning;
  const auto candidates = coarse_sweep(cfg, victim);
  std::optional<double> pos_center, neg_center;
  for (const auto& c : candidates) {
    if (c.delta_t_c > 0.0 && !pos_center) pos_center = c.frequency_hz;
    if (c.delta_t_c < 0.0 && !neg_center) neg_center = c.frequency_hz;
  }
  const auto refine = [&](double center) -> SweepCandidate {
    const double f = fine_tune(cfg, victim, center);
    const DisplayedReading before = victim.observe();
    victim.transmit(f, 1.0);
    victim.wait(cfg.dwell_s);
    const double dt = victim.observe().temp_c - before.temp_c;
    victim.transmit(f, 0.0);
    victim.wait(cfg.dwell_s);
    return {f, dt};
  };
  if (pos_center) tuning.positive = refine(*pos_center);
  if (neg_center) tuning.negative = refine(*neg_center);
  return tuning;
}

struct RampResult {
  std::vector<std::pair<double, double>> schedule; // (t_s, transmit watts)
  bool shortfall = false;
  std::string note;
};

/// Alarm-evading power ramp: closed loop on the displayed reading that keeps
/// |reported - preset| within the evasion margin at every tick while driving
/// the plant in the goal direction. The preset is taken from the pre-attack
/// steady reading; carrier and full-budget authority come from the attack
/// plan (a prior tuning session). `sensor_knowledge` is the victim's
/// published transfer function (datasheet-level information the threat model
/// grants); with it the heating park point is computed by inverting the
/// reading/offset chain, without it by the temperature-domain ratio.
inline RampResult alarm_evading_ramp(const AttackerScenarioConfig& cfg, AttackGoalKind goal,
                                     VictimChannel& victim,
                                     const SensorModel* sensor_knowledge = nullptr) {
  RampResult result;
  const double dt = victim.tick_seconds();
  const bool heating = goal == AttackGoalKind::heat_to_limit;
  if (cfg.evasion_margin_c <= 0.0) {
    while (!victim.expired()) {
      victim.transmit(cfg.tuned_freq_hz.value_or(0.0), 0.0);
      victim.wait(dt);
      result.schedule.emplace_back(victim.time_s(), 0.0);
    }
    result.note = "zero evasion margin: cannot act without deviating";
    return result;
  }
  if (!cfg.tuned_freq_hz || !cfg.authority_hint_c) {
    result.shortfall = true;
    result.note = "no tuned carrier/authority in the attack plan";
    return result;
  }
  const double freq = *cfg.tuned_freq_hz;
  const double authority = *cfg.authority_hint_c; // signed reading shift at full budget
  // Heating spoofs the reading down; cooling spoofs it up.
  if ((heating && authority >= 0.0) || (!heating && authority <= 0.0)) {
    result.shortfall = true;
    result.note = "tuned carrier shifts the reading in the wrong direction for this goal";
    return result;
  }
  const double preset = victim.observe().temp_c;
  double amp_cap = 1.0;
  if (heating) {
    const double park_margin = 0.03; // park the plant just under the high limit
    const double park = cfg.limit_c - park_margin;
    double ratio;
    if (sensor_knowledge) {
      // offset needed at the park point over the full-budget offset, both in
      // the amplifier-output voltage domain where power scaling is linear
      const double v_preset = temp_to_voltage(*sensor_knowledge, preset);
      const double dv_full = temp_to_voltage(*sensor_knowledge, preset + authority) - v_preset;
      const double dv_needed = v_preset - temp_to_voltage(*sensor_knowledge, park);
      ratio = (dv_full == 0.0) ? std::numeric_limits<double>::infinity() : dv_needed / dv_full;
    } else {
      ratio = (park - preset) / std::abs(authority);
    }
    if (ratio <= 0.0) {
      amp_cap = 0.0;
      result.note = "plant already at the requested limit";
    } else if (ratio > 1.0) {
      amp_cap = 1.0;
      result.shortfall = true;
      result.note = "full budget cannot push the plant to the limit at this distance";
    } else {
      amp_cap = std::sqrt(ratio);
    }
  }
  double amp = 0.0;
  while (!victim.expired()) {
    const DisplayedReading r = victim.observe();
    double target = heating ? preset - 0.9 * cfg.evasion_margin_c
                            : preset + 0.9 * cfg.evasion_margin_c;
    // Near the authority limit, back off to holding the preset so the loop
    // never needs more spoof than the budget can deliver.
    if (!heating && amp > 0.92) target = preset + cfg.feedback_resolution_c;
    const double err = heating ? (r.temp_c - target) : (target - r.temp_c);
    const double max_step = cfg.envelope_slew_per_s * dt;
    const double step = std::clamp(0.25 * err * dt, -max_step, max_step);
    amp = std::clamp(amp + step, 0.0, amp_cap);
    victim.transmit(freq, amp);
    victim.wait(dt);
    result.schedule.emplace_back(victim.time_s(), cfg.power_budget_w * amp * amp);
  }
  if (!heating && amp >= 0.999) {
    result.shortfall = true;
    result.note = "budget exhausted before the plant reached its floor";
  }
  return result;
}

struct TrackResult {
  double frequency_hz = 0.0;
  std::vector<std::pair<double, double>> envelope; // (t_s, amplitude)
  int clamped_ticks = 0;
};

/// Drives the displayed reading along a target waveform by inverting the
/// reading/offset relationship per tick: the needed shift scales with
/// amplitude squared in the linear regime, with a slow feedback trim soaking
/// up sensor nonlinearity. Budget-limited ticks are clamped and counted.
inline TrackResult track_waveform(const AttackerScenarioConfig& cfg, const TargetWaveform& target,
                                  VictimChannel& victim) {
  TrackResult result;
  const double dt = victim.tick_seconds();
  if (!cfg.tuned_freq_hz) return result;
  const double freq = *cfg.tuned_freq_hz;
  result.frequency_hz = freq;
  const double baseline = victim.observe().temp_c;
  double full_shift;
  if (cfg.authority_hint_c) {
    full_shift = *cfg.authority_hint_c;
  } else {
    victim.transmit(freq, 1.0);
    victim.wait(cfg.dwell_s);
    full_shift = victim.observe().temp_c - baseline;
    victim.transmit(freq, 0.0);
    victim.wait(cfg.dwell_s);
  }
  double trim = 0.0;
  while (!victim.expired()) {
    const double wanted = target.at(victim.time_s()) - baseline + trim;
    const double ratio = (full_shift == 0.0) ? 0.0 : wanted / full_shift;
    double amp = 0.0;
    if (ratio <= 0.0) {
      if (std::abs(wanted) > 2.0 * cfg.feedback_resolution_c) ++result.clamped_ticks;
    } else if (ratio >= 1.0) {
      amp = 1.0;
      if (ratio > 1.0) ++result.clamped_ticks;
    } else {
      amp = std::sqrt(ratio);
    }
    victim.transmit(freq, amp);
    victim.wait(dt);
    result.envelope.emplace_back(victim.time_s(), amp);
    const double err = target.at(victim.time_s()) - victim.observe().temp_c;
    trim = std::clamp(trim + 0.3 * err, -2.0, 2.0);
  }
  return result;
}

/// Serializes a finished attack for replay: carrier, budget and the schedule
/// breakpoints (consecutive equal values are collapsed).
inline nlohmann::json attack_plan_json(AttackGoalKind goal, double carrier_hz,
                                       double power_budget_w,
                                       const std::vector<std::pair<double, double>>& schedule,
                                       const char* value_key) {
  nlohmann::json plan;
  plan["schema_version"] = 1;
  plan["goal"] = goal_name(goal);
  plan["carrier_hz"] = carrier_hz;
  plan["power_budget_w"] = power_budget_w;
  nlohmann::json points = nlohmann::json::array();
  double last = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [t, v] : schedule) {
    if (v == last) continue;
    points.push_back({t, v});
    last = v;
  }
  if (!schedule.empty() && (points.empty() || points.back()[0] != schedule.back().first))
    points.push_back({schedule.back().first, schedule.back().second});
  plan[value_key] = points;
  return plan;
}

inline nlohmann::json ramp_plan_json(const AttackerScenarioConfig& cfg, AttackGoalKind goal,
                                     const RampResult& r) {
  auto plan = attack_plan_json(goal, cfg.tuned_freq_hz.value_or(0.0), cfg.power_budget_w,
                               r.schedule, "power_breakpoints_w");
  plan["shortfall"] = r.shortfall;
  if (!r.note.empty()) plan["note"] = r.note;
  return plan;
}

inline nlohmann::json track_plan_json(const AttackerScenarioConfig& cfg, const TrackResult& r) {
  auto plan = attack_plan_json(AttackGoalKind::track_waveform, r.frequency_hz,
                               cfg.power_budget_w, r.envelope, "envelope_breakpoints");
  plan["clamped_ticks"] = r.clamped_ticks;
  return plan;
}

struct FaultInjectionResult {
  bool success = false;
  double frequency_hz = 0.0;
  std::string note;
};

/// Hunts the coarse grid for a carrier that drives the victim's raw voltage
/// out of its valid range; on success the transmitter stays keyed so the
/// victim-side behavior lands in the trace.
inline FaultInjectionResult fault_injection(const AttackerScenarioConfig& cfg,
                                            VictimChannel& victim) {
  FaultInjectionResult result;
  if (cfg.power_budget_w <= 0.0) {
    result.note = "no power budget";
    return result;
  }
  for (double f = cfg.freq_lo_hz; f <= cfg.freq_hi_hz && !victim.expired();
       f += cfg.coarse_step_hz) {
    victim.transmit(f, 1.0);
    victim.wait(cfg.dwell_s);
    if (victim.observe().fault) {
      result.success = true;
      result.frequency_hz = f;
      result.note = "victim reading entered fault state";
      return result; // keep transmitting
    }
    victim.transmit(f, 0.0);
    victim.wait(cfg.dwell_s / 2.0);
  }
  result.note = "no frequency in range drives the reading out of its valid range at this budget";
  return result;
}

} // namespace emirect
