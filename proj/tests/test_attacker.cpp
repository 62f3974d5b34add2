#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "emirect/attacker.hpp"
#include "emirect/campaign.hpp"
#include "emirect/simulation.hpp"

using namespace emirect;
using Catch::Approx;

namespace {

const std::filesystem::path kData{EMIRECT_DATA_DIR};

Scenario load(const std::string& name) {
  return load_scenario(kData / "scenarios" / (name + ".json"));
}

/// Monitoring victim built around the reference NTC circuitry at 0.2 m:
/// steady 25 C plant, no controller, generous duration for sweeps.
Scenario reference_victim(double duration_s) {
  Scenario s;
  s.name = "reference_victim";
  s.profile_id = "reference_ntc";
  s.profile = load_profile((kData / "profiles" / "reference_ntc.json").string());
  s.plant.heat_capacity_j_per_k = 2000.0;
  s.plant.conductance_w_per_k = 4.0;
  s.plant.heater_max_w = 0.0;
  s.plant.cooler_max_w = 0.0;
  s.plant.ambient_c = 25.0;
  s.controller_enabled = false;
  s.alarms_enabled = false;
  s.attacker.enabled = true;
  s.attacker.power_budget_w = 4.0;
  s.geometry.distance_m = 0.2;
  s.duration_s = duration_s;
  s.dt_s = 0.1;
  s.initial_temp_c = 25.0;
  s.seed = 5;
  return s;
}

/// Pure synthetic victim: a reading that responds instantly to the carrier
/// through a fixed frequency->shift map. Exercises the attacker procedures
/// against nothing but the feedback interface.
class SyntheticVictim final : public VictimChannel {
 public:
  using ShiftMap = std::function<double(double freq_hz, double amp)>;
  explicit SyntheticVictim(ShiftMap shift, double base_c = 25.0)
      : shift_(std::move(shift)), base_c_(base_c) {}

  DisplayedReading observe() override {
    const double t = base_c_ + shift_(freq_hz_, amp_);
    return {std::round(t / 0.1) * 0.1, false};
  }
  void transmit(double freq_hz, double amplitude) override {
    freq_hz_ = freq_hz;
    amp_ = amplitude;
  }
  void wait(double seconds) override { t_ += seconds; }
  double tick_seconds() const override { return 0.1; }
  double time_s() const override { return t_; }
  bool expired() const override { return t_ > 3600.0; }

 private:
  ShiftMap shift_;
  double base_c_;
  double freq_hz_ = 0.0;
  double amp_ = 0.0;
  double t_ = 0.0;
};

} // namespace

TEST_CASE("coarse sweep ranks the reference circuit's two lobes", "[attacker]") {
  Simulation sim(reference_victim(800.0));
  auto ch = sim.channel();
  AttackerScenarioConfig cfg = sim.scenario().attacker;
  cfg.freq_lo_hz = 300e6;
  cfg.freq_hi_hz = 1e9;

  const auto candidates = coarse_sweep(cfg, *ch);
  REQUIRE(candidates.size() >= 2);

  // top candidates sit on the two lobes around 807 and 953 MHz with opposite
  // reading shifts
  const auto& top = candidates[0];
  std::optional<SweepCandidate> other;
  for (const auto& c : candidates)
    if ((c.delta_t_c < 0.0) != (top.delta_t_c < 0.0)) {
      other = c;
      break;
    }
  REQUIRE(other.has_value());
  const double f_lo = std::min(top.frequency_hz, other->frequency_hz);
  const double f_hi = std::max(top.frequency_hz, other->frequency_hz);
  CHECK(std::abs(f_lo - 807e6) <= 10e6);
  CHECK(std::abs(f_hi - 953e6) <= 10e6);
}

TEST_CASE("zero budget sweeps find nothing", "[attacker]") {
  Simulation sim(reference_victim(400.0));
  auto ch = sim.channel();
  AttackerScenarioConfig cfg = sim.scenario().attacker;
  cfg.power_budget_w = 0.0;
  CHECK(coarse_sweep(cfg, *ch).empty());
}

TEST_CASE("fine tune lands on the lobe peaks", "[attacker]") {
  SECTION("positive-voltage lobe at 807 MHz") {
    Simulation sim(reference_victim(600.0));
    auto ch = sim.channel();
    CHECK(fine_tune(sim.scenario().attacker, *ch, 810e6) == Approx(807e6));
  }
  SECTION("negative-voltage lobe at 953 MHz") {
    Simulation sim(reference_victim(600.0));
    auto ch = sim.channel();
    CHECK(fine_tune(sim.scenario().attacker, *ch, 950e6) == Approx(953e6));
  }
}

TEST_CASE("fine tune tie-breaks a flat plateau to the lower frequency", "[attacker]") {
  SyntheticVictim victim([](double f, double amp) {
    if (amp <= 0.0) return 0.0;
    return (f >= 700e6 && f <= 712e6) ? 5.0 : 0.0; // flat-top lobe
  });
  AttackerScenarioConfig cfg;
  cfg.freq_lo_hz = 650e6;
  cfg.freq_hi_hz = 760e6;
  CHECK(fine_tune(cfg, victim, 705e6) == Approx(700e6));
}

TEST_CASE("attacker procedures run against the bare feedback interface", "[attacker]") {
  // nothing but observe/transmit/wait: no victim internals are reachable
  SyntheticVictim victim([](double f, double amp) {
    const double lobe = std::max(0.0, 1.0 - std::abs(f - 500e6) / 40e6);
    return 8.0 * lobe * amp * amp;
  });
  AttackerScenarioConfig cfg;
  cfg.freq_lo_hz = 400e6;
  cfg.freq_hi_hz = 600e6;
  const auto candidates = coarse_sweep(cfg, victim);
  REQUIRE_FALSE(candidates.empty());
  CHECK(candidates[0].frequency_hz == Approx(500e6));
  CHECK(fine_tune(cfg, victim, candidates[0].frequency_hz) == Approx(500e6));
}

TEST_CASE("alarm-evading heating ramp stays inside the margin", "[attacker][slow]") {
  const Scenario sc = load("incubator_heating");
  const RunResult run = simulate(sc);
  REQUIRE(run.ramp.has_value());
  CHECK_FALSE(run.ramp->shortfall);

  CHECK_FALSE(run.trace.any_alarm());
  double max_dev = 0.0;
  double reach_38_4 = -1.0;
  for (const auto& row : run.trace.rows) {
    max_dev = std::max(max_dev, std::abs(row.measured_skin_c - 36.0));
    REQUIRE(row.attack_power_w <= sc.attacker.power_budget_w + 1e-12);
    if (reach_38_4 < 0.0 && row.actual_air_c >= 38.4) reach_38_4 = row.t_s;
  }
  CHECK(max_dev <= sc.attacker.evasion_margin_c + 0.05);
  REQUIRE(reach_38_4 >= 0.0);
  CHECK(reach_38_4 <= 600.0);
  for (const auto& [t, w] : run.ramp->schedule) REQUIRE(w <= sc.attacker.power_budget_w + 1e-12);
}

TEST_CASE("alarm-evading cooling ramp reaches the ambient floor", "[attacker][slow]") {
  const Scenario sc = load("incubator_cooling");
  const RunResult run = simulate(sc);
  REQUIRE(run.ramp.has_value());
  CHECK_FALSE(run.trace.any_alarm());
  double reach_29_5 = -1.0;
  for (const auto& row : run.trace.rows) {
    REQUIRE(row.attack_power_w <= sc.attacker.power_budget_w + 1e-12);
    if (reach_29_5 < 0.0 && row.actual_air_c <= 29.5) reach_29_5 = row.t_s;
  }
  REQUIRE(reach_29_5 >= 0.0);
  CHECK(reach_29_5 <= 35.0 * 60.0);
}

TEST_CASE("zero evasion margin yields a zero-power schedule", "[attacker]") {
  Scenario sc = load("incubator_heating");
  sc.attacker.evasion_margin_c = 0.0;
  sc.duration_s = 30.0;
  Simulation sim(sc);
  auto ch = sim.channel();
  const auto result = alarm_evading_ramp(sc.attacker, AttackGoalKind::heat_to_limit, *ch);
  REQUIRE_FALSE(result.schedule.empty());
  for (const auto& [t, w] : result.schedule) REQUIRE(w == 0.0);
}

TEST_CASE("step target is tracked within tolerance after settling", "[attacker]") {
  const Scenario sc = load("thermocouple_step");
  const RunResult run = simulate(sc);
  REQUIRE(run.track.has_value());
  CHECK(run.track->frequency_hz == Approx(505e6));

  const double settle_s = 2.0;
  double step_t = 60.0;
  double max_err = 0.0;
  for (const auto& row : run.trace.rows) {
    const double target = sc.attacker.waveform.at(row.t_s);
    const bool settling = (row.t_s < settle_s) ||
                          (row.t_s >= step_t && row.t_s < step_t + settle_s) ||
                          (row.t_s >= 180.0 && row.t_s < 180.0 + settle_s);
    if (settling) continue;
    max_err = std::max(max_err, std::abs(row.measured_skin_c - target));
  }
  CHECK(max_err <= 0.5);
}

TEST_CASE("constant target equal to the true temperature keeps the envelope at zero",
          "[attacker]") {
  Scenario sc = load("thermocouple_step");
  sc.attacker.waveform.breakpoints = {{0.0, 25.0}};
  sc.duration_s = 30.0;
  const RunResult run = simulate(sc);
  REQUIRE(run.track.has_value());
  for (const auto& [t, amp] : run.track->envelope) REQUIRE(amp == 0.0);
  for (const auto& row : run.trace.rows) REQUIRE(row.attack_power_w == 0.0);
}

TEST_CASE("finished attacks export replayable plans", "[attacker]") {
  Scenario sc = load("incubator_heating");
  sc.duration_s = 120.0;
  const RunResult run = simulate(sc);
  REQUIRE(run.ramp.has_value());
  const auto plan = ramp_plan_json(sc.attacker, sc.attacker.goal, *run.ramp);
  CHECK(plan["goal"] == "heat_to_limit");
  CHECK(plan["carrier_hz"].get<double>() == Approx(910e6));
  CHECK(plan["power_budget_w"].get<double>() == Approx(4.0));
  REQUIRE(plan["power_breakpoints_w"].is_array());
  CHECK(plan["power_breakpoints_w"].size() >= 2);
  // breakpoints are (t, watts) pairs within budget
  for (const auto& bp : plan["power_breakpoints_w"]) {
    REQUIRE(bp.size() == 2);
    REQUIRE(bp[1].get<double>() <= 4.0 + 1e-12);
  }
}

TEST_CASE("fault injection finds the extruder's 400 MHz band", "[attacker]") {
  const Scenario sc = load("extruder_fault");
  const RunResult run = simulate(sc);
  REQUIRE(run.fault.has_value());
  CHECK(run.fault->success);
  CHECK(run.fault->frequency_hz == Approx(400e6));

  // the victim-side sentinel behavior lands in the trace
  bool saw_sentinel = false;
  for (const auto& row : run.trace.rows)
    if (row.measured_skin_c == 0.0 && row.attack_power_w > 0.0) saw_sentinel = true;
  CHECK(saw_sentinel);
}

TEST_CASE("fault injection with no budget reports infeasibility", "[attacker]") {
  Scenario sc = load("extruder_fault");
  sc.attacker.power_budget_w = 0.0;
  Simulation sim(sc);
  auto ch = sim.channel();
  const auto result = fault_injection(sc.attacker, *ch);
  CHECK_FALSE(result.success);
  CHECK_FALSE(result.note.empty());
}

TEST_CASE("probe alarm fires when a fault is injected into the incubator", "[attacker]") {
  const Scenario sc = load("incubator_probe_fault");
  const RunResult run = simulate(sc);
  REQUIRE(run.fault.has_value());
  CHECK(run.fault->success);
  bool probe_alarm = false;
  for (const auto& row : run.trace.rows) probe_alarm = probe_alarm || row.alarms.probe_fault;
  CHECK(probe_alarm);
}
