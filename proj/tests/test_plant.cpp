#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "emirect/plant.hpp"

using namespace emirect;
using Catch::Approx;

namespace {

ThermalPlant single_node() {
  ThermalPlant p;
  p.heat_capacity_j_per_k = 2000.0;
  p.conductance_w_per_k = 4.0;
  p.heater_max_w = 60.0;
  p.cooler_max_w = 8.0;
  p.ambient_c = 22.0;
  return p;
}

} // namespace

TEST_CASE("plant holds equilibrium and relaxes toward ambient", "[plant]") {
  const auto plant = single_node();
  NodeTemps at_ambient{22.0, 22.0};
  const auto next = plant_step(at_ambient, plant, {}, 0.1);
  CHECK(next.primary_c == Approx(22.0).margin(1e-12));

  NodeTemps hot{40.0, 40.0};
  double prev_gap = hot.primary_c - plant.ambient_c;
  NodeTemps t = hot;
  for (int i = 0; i < 100000; ++i) {
    t = plant_step(t, plant, {}, 0.1);
    const double gap = t.primary_c - plant.ambient_c;
    REQUIRE(gap >= 0.0); // never crosses ambient
    REQUIRE(gap <= prev_gap + 1e-12);
    prev_gap = gap;
  }
  CHECK(t.primary_c == Approx(plant.ambient_c).margin(1e-6));
}

TEST_CASE("steady heater duty converges to the closed-form fixed point", "[plant]") {
  const auto plant = single_node();
  const double duty = 0.55;
  const double expected = plant.ambient_c + duty * plant.heater_max_w / plant.conductance_w_per_k;
  NodeTemps t{plant.ambient_c, plant.ambient_c};
  ActuatorCommand cmd;
  cmd.heater_duty = duty;
  for (int i = 0; i < 200000; ++i) t = plant_step(t, plant, cmd, 0.1);
  CHECK(t.primary_c == Approx(expected).margin(1e-6));
}

TEST_CASE("coupled node equilibrates with the primary node", "[plant]") {
  ThermalPlant plant = single_node();
  plant.coupled = ThermalPlant::CoupledNode{250.0, 2.5};
  NodeTemps t{36.0, 30.0};
  ActuatorCommand cmd;
  cmd.heater_duty = 4.0 * (36.0 - plant.ambient_c) / plant.heater_max_w; // hold primary at 36
  for (int i = 0; i < 300000; ++i) t = plant_step(t, plant, cmd, 0.1);
  CHECK(t.secondary_c == Approx(t.primary_c).margin(1e-3));
}

TEST_CASE("energy sanity: unactuated gap to ambient never grows", "[plant]") {
  ThermalPlant plant = single_node();
  plant.coupled = ThermalPlant::CoupledNode{250.0, 2.5};
  NodeTemps t{15.0, 18.0}; // below ambient: relaxation from the other side
  double prev = std::abs(t.primary_c - plant.ambient_c);
  for (int i = 0; i < 50000; ++i) {
    t = plant_step(t, plant, {}, 0.1);
    const double gap = std::abs(t.primary_c - plant.ambient_c);
    REQUIRE(gap <= prev + 1e-12);
    prev = gap;
  }
}

TEST_CASE("stability bound rejects oversized steps", "[plant]") {
  const auto plant = single_node();
  CHECK(plant.max_stable_dt() == Approx(2000.0 / 40.0));
  ThermalPlant two = plant;
  two.coupled = ThermalPlant::CoupledNode{250.0, 2.5};
  CHECK(two.max_stable_dt() == Approx(std::min(2000.0 / 65.0, 250.0 / 25.0)));
  CHECK_THROWS_AS(plant_step({}, plant, {}, 0.0), std::domain_error);
}

TEST_CASE("on-off controller holds inside the hysteresis band", "[plant]") {
  ControllerConfig cfg;
  cfg.law = ControlLaw::on_off;
  cfg.setpoint_c = 36.0;
  cfg.hysteresis_band_c = 0.4;
  cfg.actuator_slew_w_per_s = 1e9;
  const auto plant = single_node();

  ControllerState st;
  st.command.heater_duty = 1.0;
  // exactly at setpoint: inside the band, command unchanged
  auto cmd = controller_step(36.0, cfg, st, plant, 0.1);
  CHECK(cmd.heater_duty == 1.0);

  cmd = controller_step(36.0 + 0.3, cfg, st, plant, 0.1);
  CHECK(cmd.heater_duty == 0.0);
  CHECK(cmd.cooler_duty == 1.0);

  cmd = controller_step(36.0 - 0.3, cfg, st, plant, 0.1);
  CHECK(cmd.heater_duty == 1.0);
  CHECK(cmd.cooler_duty == 0.0);
}

TEST_CASE("PI controller drives toward the setpoint with bounded windup", "[plant]") {
  ControllerConfig cfg;
  cfg.law = ControlLaw::pi;
  cfg.setpoint_c = 36.0;
  cfg.kp = 1.5;
  cfg.ki = 0.004;
  const auto plant = single_node();

  ControllerState st;
  // spoofed 1.8 C below the preset: heater drives toward full duty
  auto cmd = controller_step(36.0 - 1.8, cfg, st, plant, 0.1);
  for (int i = 0; i < 50; ++i) cmd = controller_step(36.0 - 1.8, cfg, st, plant, 0.1);
  CHECK(cmd.heater_duty == Approx(1.0));
  CHECK(cmd.cooler_duty == 0.0);

  // long saturation must not wind the integral past its clamp
  for (int i = 0; i < 200000; ++i) controller_step(30.0, cfg, st, plant, 0.1);
  CHECK(st.integral <= 1.0);

  // spoofed above the setpoint: cooling engages
  ControllerState st2;
  ActuatorCommand cmd2;
  for (int i = 0; i < 50; ++i) cmd2 = controller_step(38.5, cfg, st2, plant, 0.1);
  CHECK(cmd2.cooler_duty > 0.0);
  CHECK(cmd2.heater_duty == 0.0);
}

TEST_CASE("actuator slew limits the command rate", "[plant]") {
  ControllerConfig cfg;
  cfg.law = ControlLaw::pi;
  cfg.setpoint_c = 36.0;
  cfg.actuator_slew_w_per_s = 6.0; // 0.1 duty/s on a 60 W heater
  const auto plant = single_node();
  ControllerState st;
  const auto cmd = controller_step(30.0, cfg, st, plant, 0.1);
  CHECK(cmd.heater_duty == Approx(0.01).margin(1e-12));
}

TEST_CASE("alarm predicates use strict limits", "[plant]") {
  AlarmConfig cfg;

  // deviation of exactly 1.0 C: no alarm ("larger than" is strict)
  CHECK_FALSE(alarm_step(35.0, 36.0, 30.0, false, cfg).preset_deviation);
  CHECK(alarm_step(34.99, 36.0, 30.0, false, cfg).preset_deviation);
  CHECK(alarm_step(37.01, 36.0, 30.0, false, cfg).preset_deviation);

  CHECK_FALSE(alarm_step(36.0, 36.0, 38.5, false, cfg).high_temperature);
  CHECK(alarm_step(36.0, 36.0, 38.51, false, cfg).high_temperature);
  CHECK(alarm_step(36.0, 36.0, 38.6, false, cfg).high_temperature);

  CHECK(alarm_step(36.0, 36.0, 30.0, true, cfg).probe_fault);
  cfg.probe_fault_enabled = false;
  CHECK_FALSE(alarm_step(36.0, 36.0, 30.0, true, cfg).probe_fault);

  const auto nominal = alarm_step(36.0, 36.0, 36.2, false, AlarmConfig{});
  CHECK_FALSE(nominal.any());
  CHECK(nominal.to_string().empty());

  AlarmSet all{true, true, true};
  CHECK(all.to_string() == "preset_deviation|high_temperature|probe_fault");
}
