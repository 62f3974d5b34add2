#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "emirect/attacker.hpp"
#include "emirect/detector.hpp"
#include "emirect/plant.hpp"
#include "emirect/profile_io.hpp"
#include "emirect/rng.hpp"
#include "emirect/scenario_io.hpp"
#include "emirect/trace_io.hpp"

namespace emirect {

/// One closed-loop run: plant, controller, alarm logic, sensor chain with
/// rectified offsets, optional anomaly detector and the attack transmitter
/// state. Each tick follows the fixed order: attacker command (set by the
/// caller before step()) -> propagation -> rectification -> sensor reads ->
/// detector -> controller + alarms -> plant integration.
class Simulation {
 public:
  explicit Simulation(Scenario scenario) : sc_(std::move(scenario)), rng_(sc_.seed) {
    sc_.profile = calibrate_device(std::move(sc_.profile));
    sc_.profile.susceptibility = specialize_for_distance(
        std::move(sc_.profile.susceptibility), sc_.geometry.distance_m, CouplingMode::radiated);
    state_.t_s = 0.0;
    state_.actual.primary_c = sc_.initial_temperature();
    state_.actual.secondary_c = sc_.initial_temperature();
    // Start at the controller's equilibrium so scenarios begin in steady state.
    if (sc_.controller_enabled && sc_.controller.law == ControlLaw::pi) {
      const double eq_duty = sc_.plant.heater_max_w > 0.0
                                 ? std::clamp(sc_.plant.conductance_w_per_k *
                                                  (sc_.controller.setpoint_c - sc_.plant.ambient_c) /
                                                  sc_.plant.heater_max_w,
                                              0.0, 1.0)
                                 : 0.0;
      ctrl_.integral = eq_duty;
      ctrl_.command.heater_duty = eq_duty;
    }
    refresh_readings();
  }

  const Scenario& scenario() const { return sc_; }
  const SystemState& state() const { return state_; }
  const Trace& trace() const { return trace_; }
  Trace take_trace() { return std::move(trace_); }
  double time_s() const { return state_.t_s; }
  bool expired() const { return state_.t_s >= sc_.duration_s - 1e-9; }

  void set_attack(double freq_hz, double amplitude) {
    attack_freq_hz_ = freq_hz;
    attack_amp_ = std::clamp(amplitude, 0.0, 1.0);
  }

  DisplayedReading display() const {
    return {displayed_temp(sc_.profile, last_primary_), last_primary_.fault != FaultKind::none};
  }

  void step() {
    if (expired()) return;
    const double p_recv = received_power_now();
    refresh_offsets(p_recv);
    refresh_readings();

    state_.sensor_reliability = Reliability::trusted;
    if (sc_.detector.enabled) {
      std::vector<EmiTone> env;
      if (p_recv > 0.0) env.push_back({attack_freq_hz_, p_recv});
      const auto reports = scan_bands(sc_.detector.chain, sc_.detector.lo_schedule_hz, env, rng_);
      for (const auto& r : reports)
        if (r.detected) state_.sensor_reliability = Reliability::suspect;
    }

    if (sc_.controller_enabled) {
      const bool hold = sc_.controller.safe_mode_on_suspect &&
                        state_.sensor_reliability == Reliability::suspect;
      if (!hold)
        state_.command =
            controller_step(state_.measured_primary_c, sc_.controller, ctrl_, sc_.plant, sc_.dt_s);
      else
        state_.command = ctrl_.command;
    } else {
      state_.command = {};
    }

    const bool any_fault = last_primary_.fault != FaultKind::none ||
                           last_air_.fault != FaultKind::none ||
                           last_high_.fault != FaultKind::none;
    state_.alarms = sc_.alarms_enabled
                        ? alarm_step(state_.measured_primary_c, sc_.controller.setpoint_c,
                                     state_.measured_high_c, any_fault, sc_.alarms)
                        : AlarmSet{};

    TraceRow row;
    row.t_s = state_.t_s;
    row.actual_air_c = state_.actual.primary_c;
    row.actual_skin_c = state_.actual.secondary_c;
    row.measured_skin_c = state_.measured_primary_c;
    row.measured_air_c = state_.measured_air_c;
    row.heater_duty = state_.command.heater_duty;
    row.cooler_duty = state_.command.cooler_duty;
    row.alarms = state_.alarms;
    row.detector_flag = state_.sensor_reliability;
    row.attack_freq_hz = attack_amp_ > 0.0 ? attack_freq_hz_ : 0.0;
    row.attack_power_w = sc_.attacker.power_budget_w * attack_amp_ * attack_amp_;
    trace_.rows.push_back(row);

    state_.actual = plant_step(state_.actual, sc_.plant, state_.command, sc_.dt_s);
    state_.t_s += sc_.dt_s;
  }

  void run_for(double seconds) {
    const long n = std::lround(seconds / sc_.dt_s);
    for (long i = 0; i < n && !expired(); ++i) step();
  }

  void run_until_end() {
    while (!expired()) step();
  }

  /// The adversary's view of this run.
  std::unique_ptr<VictimChannel> channel();

 private:
  double received_power_now() const {
    if (attack_amp_ <= 0.0 || attack_freq_hz_ <= 0.0 || sc_.attacker.power_budget_w <= 0.0)
      return 0.0;
    EmiSource src;
    src.carrier_freq_hz = attack_freq_hz_;
    src.tx_power_w = sc_.attacker.power_budget_w;
    const double amp = attack_amp_;
    src.envelope = [amp](double) { return amp; };
    return received_power(src, sc_.geometry, state_.t_s);
  }

  void refresh_offsets(double p_recv) {
    offset_primary_v_ = 0.0;
    offset_aux_v_ = 0.0;
    if (p_recv > 0.0) {
      offset_primary_v_ = offset_at(sc_.profile.susceptibility, attack_freq_hz_, p_recv).volts;
      if (sc_.profile.aux_coupling_scale > 0.0)
        offset_aux_v_ = offset_with_scale(sc_.profile.susceptibility, attack_freq_hz_, p_recv,
                                          sc_.profile.aux_coupling_scale)
                            .volts;
    }
  }

  void refresh_readings() {
    const double primary_true = sc_.controller.mode == ControlMode::skin_servocontrol
                                    ? state_.actual.secondary_c
                                    : state_.actual.primary_c;
    last_primary_ = device_read(sc_.profile, primary_true, offset_primary_v_);
    last_air_ = device_read(sc_.profile, state_.actual.primary_c, offset_aux_v_);
    last_high_ = device_read(sc_.profile, state_.actual.primary_c, offset_aux_v_);
    state_.measured_primary_c = last_primary_.reported_temp_c;
    state_.measured_air_c = last_air_.reported_temp_c;
    state_.measured_high_c = last_high_.reported_temp_c;
    state_.primary_fault = last_primary_.fault;
  }

  Scenario sc_;
  Rng rng_;
  SystemState state_;
  ControllerState ctrl_;
  Trace trace_;
  double attack_freq_hz_ = 0.0;
  double attack_amp_ = 0.0;
  double offset_primary_v_ = 0.0;
  double offset_aux_v_ = 0.0;
  SensorReading last_primary_, last_air_, last_high_;
};

namespace detail {

class SimulationChannel final : public VictimChannel {
 public:
  explicit SimulationChannel(Simulation& sim) : sim_(sim) {}

  DisplayedReading observe() override { return sim_.display(); }
  void transmit(double freq_hz, double amplitude) override { sim_.set_attack(freq_hz, amplitude); }
  void wait(double seconds) override { sim_.run_for(seconds); }
  double tick_seconds() const override { return sim_.scenario().dt_s; }
  double time_s() const override { return sim_.time_s(); }
  bool expired() const override { return sim_.expired(); }

 private:
  Simulation& sim_;
};

} // namespace detail

inline std::unique_ptr<VictimChannel> Simulation::channel() {
  return std::make_unique<detail::SimulationChannel>(*this);
}

/// Outcome of one timeline scenario: the trace plus whatever the attack
/// procedure reported.
struct RunResult {
  Trace trace;
  std::optional<RampResult> ramp;
  std::optional<TrackResult> track;
  std::optional<FaultInjectionResult> fault;
  std::optional<AttackTuning> tuning;
};

/// Runs a timeline scenario end to end: the attacker procedure selected by
/// the goal drives the victim through its feedback channel, then the
/// remaining scenario time plays out with the final transmitter command held.
inline RunResult simulate(const Scenario& scenario) {
  if (scenario.kind != ScenarioKind::timeline)
    throw std::invalid_argument("simulate: scenario '" + scenario.name + "' is not a timeline");
  RunResult result;
  Simulation sim(scenario);
  if (scenario.attacker.enabled && scenario.attacker.goal != AttackGoalKind::none) {
    auto ch = sim.channel();
    AttackerScenarioConfig cfg = scenario.attacker;
    if (!cfg.tuned_freq_hz && cfg.goal != AttackGoalKind::fault_injection) {
      // No pre-tuned carrier in the plan: run the tuning procedures first.
      const AttackTuning tuning = tune(cfg, *ch);
      result.tuning = tuning;
      const bool wants_negative = cfg.goal == AttackGoalKind::heat_to_limit;
      const auto& pick = wants_negative ? tuning.negative : tuning.positive;
      if (pick) {
        cfg.tuned_freq_hz = pick->frequency_hz;
        cfg.authority_hint_c = pick->delta_t_c;
      }
    }
    switch (cfg.goal) {
      case AttackGoalKind::heat_to_limit:
      case AttackGoalKind::cool_to_ambient:
        result.ramp = alarm_evading_ramp(cfg, cfg.goal, *ch, &scenario.profile.sensor);
        break;
      case AttackGoalKind::track_waveform:
        result.track = track_waveform(cfg, cfg.waveform, *ch);
        break;
      case AttackGoalKind::suppress_alarm: {
        TargetWaveform hold;
        hold.breakpoints = {{0.0, ch->observe().temp_c}};
        result.track = track_waveform(cfg, hold, *ch);
        break;
      }
      case AttackGoalKind::fault_injection:
        result.fault = fault_injection(cfg, *ch);
        break;
      case AttackGoalKind::none:
        break;
    }
  }
  sim.run_until_end();
  result.trace = sim.take_trace();
  return result;
}

} // namespace emirect
