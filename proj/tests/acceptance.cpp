// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emirect/campaign.hpp"
#include "emirect/simulation.hpp"

using namespace emirect;
namespace fs = std::filesystem;

namespace {

const fs::path kData{EMIRECT_DATA_DIR};

struct Criterion {
  std::string label;
  double time_budget_s;
  std::function<bool(std::string&)> check;
};

bool rel_close(double got, double want, double rel_tol) {
  return std::abs(got - want) <= rel_tol * std::abs(want);
}

bool close_with_floor(double got, double want, double rel, double floor_abs) {
  return std::abs(got - want) <= std::max(rel * std::abs(want), floor_abs);
}

// ---- criterion 1: rectification laws --------------------------------------

bool check_rectification(std::string& msg) {
  BjtAmpParams bjt;
  FetAmpParams fet;
  fet.zero_bias_drain_current_a = 2e-3;
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> amp(1e-6, 0.5);
  std::uniform_real_distribution<double> power(1e-9, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = amp(gen);
    const double b1 = bjt_dc_current_shift(v, bjt);
    if (std::abs(bjt_dc_current_shift(2.0 * v, bjt) - 4.0 * b1) > 1e-12 * 4.0 * b1) {
      msg = "BJT quadratic law violated";
      return false;
    }
    const double f1 = fet_dc_current_shift(v, fet);
    if (std::abs(fet_dc_current_shift(2.0 * v, fet) - 4.0 * f1) > 1e-12 * 4.0 * f1) {
      msg = "FET quadratic law violated";
      return false;
    }
    const double p = power(gen);
    const double d1 = dc_offset_from_power(p, bjt);
    if (std::abs(dc_offset_from_power(2.0 * p, bjt) - 2.0 * d1) > 1e-12 * 2.0 * d1) {
      msg = "power linearity violated";
      return false;
    }
  }
  const double spot = bjt_dc_current_shift(0.01, BjtAmpParams{});
  if (!rel_close(spot, 3.79e-5, 1e-3)) {
    msg = "collector-shift spot value off: " + std::to_string(spot);
    return false;
  }
  return true;
}

// ---- criterion 2: propagation laws -----------------------------------------

bool check_propagation(std::string& msg) {
  std::mt19937_64 gen(202);
  std::uniform_real_distribution<double> freq(10e6, 3e9), dist(0.05, 30.0), pw(0.01, 10.0);
  for (int i = 0; i < 1000; ++i) {
    EmiSource src;
    src.carrier_freq_hz = freq(gen);
    src.tx_power_w = pw(gen);
    LinkGeometry geom;
    geom.distance_m = dist(gen);
    const double p1 = received_power(src, geom, 0.0);
    LinkGeometry far = geom;
    far.distance_m = 2.0 * geom.distance_m;
    if (std::abs(received_power(src, far, 0.0) - p1 / 4.0) > 1e-12 * p1) {
      msg = "inverse-square law violated";
      return false;
    }
    EmiSource hi = src;
    hi.carrier_freq_hz = 2.0 * src.carrier_freq_hz;
    if (std::abs(received_power(hi, geom, 0.0) - p1 / 4.0) > 1e-12 * p1) {
      msg = "frequency-square law violated";
      return false;
    }
  }
  EmiSource src;
  src.carrier_freq_hz = 810e6;
  src.tx_power_w = 4.0;
  LinkGeometry geom;
  geom.distance_m = 1.0;
  const double spot = received_power(src, geom, 0.0);
  if (!rel_close(spot, 3.47e-3, 1e-3)) {
    msg = "free-space spot value off: " + std::to_string(spot);
    return false;
  }
  return true;
}

// ---- criterion 3: sensor round trip ----------------------------------------

bool check_sensor_round_trip(std::string& msg) {
  const auto grid = [&msg](const SensorModel& m, double lo, double hi, const char* name) {
    for (int i = 0; i <= 100; ++i) {
      const double t = lo + (hi - lo) * i / 100.0;
      const double back = voltage_to_temp(m, temp_to_voltage(m, t));
      if (std::abs(back - t) >= 0.01) {
        msg = std::string(name) + " round trip error at " + std::to_string(t);
        return false;
      }
    }
    return true;
  };
  return grid(ThermistorModel{}, -30.0, 130.0, "thermistor") &&
         grid(ThermocoupleModel{}, -150.0, 1300.0, "thermocouple") &&
         grid(RtdModel{}, -40.0, 420.0, "rtd");
}

// ---- criterion 4: summary-table regression ---------------------------------

struct TableRow {
  std::string device;
  std::optional<double> dt_max, dt_max_freq_mhz;
  std::optional<double> dt_min, dt_min_freq_mhz;
  double max_distance_m;
};

bool check_table_regression(std::string& msg) {
  const std::vector<TableRow> expected{
      {"isolette_c100", 58.4, 530.0, -15.9, 847.0, 5.8},
      {"fisherbrand_traceable", 37.0, 690.0, -22.0, 730.0, 3.4},
      {"thomas_traceable", 16.0, 640.0, -50.0, 830.0, 1.6},
      {"uvp_hb500", 42.4, 516.0, -2.8, 453.0, 3.3},
      {"rs_incufridge", 0.9, 308.0, -3.3, 309.0, 0.6},
      {"sun_ec12", 3.35, 686.0, -2.88, 1300.0, 0.3},
      {"makerbot_extruder", 10.0, 1000.0, std::nullopt, std::nullopt, 0.25},
      {"inkbird_itc100vh", 78.0, 556.0, std::nullopt, std::nullopt, 11.5},
      {"inkbird_itc1000f", std::nullopt, std::nullopt, -10.6, 713.0, 0.9},
      {"inkbird_itc100rh", 80.9, 453.0, std::nullopt, std::nullopt, 16.2},
  };
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(kData / "campaign_table1"))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  const auto out_dir = fs::temp_directory_path() / "emirect_acceptance_campaign";
  const auto result = run_campaign(files, out_dir);
  if (!result.failures.empty()) {
    msg = "campaign failure: " + result.failures.front();
    return false;
  }
  for (const auto& want : expected) {
    const CampaignRow* got = nullptr;
    for (const auto& row : result.rows)
      if (row.device_id == want.device) got = &row;
    if (!got) {
      msg = "no summary row for " + want.device;
      return false;
    }
    const auto check_side = [&](const std::optional<double>& w_dt,
                                const std::optional<double>& w_f,
                                const std::optional<std::pair<double, double>>& g) {
      if (!w_dt) return !g.has_value();
      if (!g) return false;
      return close_with_floor(g->first, *w_dt, 0.05, 0.5) &&
             std::abs(g->second / 1e6 - *w_f) < 0.5;
    };
    if (!check_side(want.dt_max, want.dt_max_freq_mhz, got->dt_max)) {
      msg = want.device + ": max-shift column mismatch";
      return false;
    }
    if (!check_side(want.dt_min, want.dt_min_freq_mhz, got->dt_min)) {
      msg = want.device + ": min-shift column mismatch";
      return false;
    }
    if (!got->max_attack_distance_m ||
        !rel_close(*got->max_attack_distance_m, want.max_distance_m, 0.10)) {
      msg = want.device + ": max attack distance mismatch";
      return false;
    }
  }
  // the incubator distance must come out of the 2 m / 4.2 C extrapolation
  const double incubator = max_effect_distance(2.0, 4.2, 0.5);
  if (!rel_close(incubator, 5.8, 0.01)) {
    msg = "incubator extrapolation off: " + std::to_string(incubator);
    return false;
  }
  return true;
}

// ---- criterion 5: incubator attack timelines -------------------------------

bool check_heating(std::string& msg) {
  const auto sc = load_scenario(kData / "scenarios" / "incubator_heating.json");
  const auto run = simulate(sc);
  if (run.trace.any_alarm()) {
    msg = "alarm raised during heating attack";
    return false;
  }
  for (const auto& row : run.trace.rows)
    if (row.actual_air_c >= 38.4 && row.t_s <= 600.0) return true;
  msg = "actual air never reached 38.4 C within 10 minutes";
  return false;
}

bool check_cooling(std::string& msg) {
  const auto sc = load_scenario(kData / "scenarios" / "incubator_cooling.json");
  const auto run = simulate(sc);
  if (run.trace.any_alarm()) {
    msg = "alarm raised during cooling attack";
    return false;
  }
  for (const auto& row : run.trace.rows)
    if (row.actual_air_c <= 29.5 && row.t_s <= 35.0 * 60.0) return true;
  msg = "actual air never reached 29.5 C within 35 minutes";
  return false;
}

// ---- criterion 6: alarm predicate boundaries -------------------------------

bool check_alarm_boundaries(std::string& msg) {
  AlarmConfig cfg;
  if (alarm_step(35.0, 36.0, 30.0, false, cfg).preset_deviation) {
    msg = "deviation of exactly 1.0 C must not alarm";
    return false;
  }
  if (!alarm_step(34.99, 36.0, 30.0, false, cfg).preset_deviation) {
    msg = "deviation of 1.01 C must alarm";
    return false;
  }
  if (alarm_step(36.0, 36.0, 38.5, false, cfg).high_temperature) {
    msg = "high sensor at exactly 38.5 C must not alarm";
    return false;
  }
  if (!alarm_step(36.0, 36.0, 38.51, false, cfg).high_temperature) {
    msg = "high sensor at 38.51 C must alarm";
    return false;
  }
  if (!alarm_step(36.0, 36.0, 30.0, true, cfg).probe_fault) {
    msg = "injected probe fault must alarm";
    return false;
  }
  return true;
}

// ---- criterion 7: waveform tracking ----------------------------------------

bool check_tracking(std::string& msg) {
  for (const char* name : {"thermocouple_step", "thermocouple_hi"}) {
    const auto sc = load_scenario(kData / "scenarios" / (std::string(name) + ".json"));
    const auto run = simulate(sc);
    const double settle_s = 2.0;
    // collect breakpoint times; error is judged after each settles
    std::vector<double> steps;
    for (const auto& [t, v] : sc.attacker.waveform.breakpoints) steps.push_back(t);
    for (const auto& row : run.trace.rows) {
      bool settling = row.t_s < settle_s;
      for (double t0 : steps) settling = settling || (row.t_s >= t0 && row.t_s < t0 + settle_s);
      if (settling) continue;
      const double target = sc.attacker.waveform.at(row.t_s);
      if (std::abs(row.measured_skin_c - target) > 0.5) {
        msg = std::string(name) + ": tracking error " +
              std::to_string(std::abs(row.measured_skin_c - target)) + " C at t=" +
              std::to_string(row.t_s);
        return false;
      }
    }
  }
  return true;
}

// ---- criterion 8: detector ---------------------------------------------------

bool check_detector(std::string& msg) {
  DetectorChain chain;
  chain.rf_low_edge_hz = 450e6;
  chain.rf_high_edge_hz = 1050e6;
  chain.lo_freq_hz = 903e6;
  const double p_recv = friis_received_power(503e6, dbm_to_watts(35.0), 3.0);
  const std::vector<EmiTone> attack{{503e6, p_recv}};
  int hits = 0, fps = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    if (detect(attack, chain, seed).detected) ++hits;
    if (detect({}, chain, seed + 700000).detected) ++fps;
  }
  if (hits != 1000) {
    msg = "detection rate " + std::to_string(hits) + "/1000";
    return false;
  }
  if (fps >= 10) {
    msg = "false-positive rate " + std::to_string(fps) + "/1000";
    return false;
  }
  const double wanted = chain_power(chain.wanted_freq_hz(), 1e-3, chain);
  const double image = chain_power(chain.image_freq_hz(), 1e-3, chain);
  if (wanted - image < 40.0) {
    msg = "image rejection only " + std::to_string(wanted - image) + " dB";
    return false;
  }
  const double edge_db =
      20.0 * std::log10(butterworth_bandpass_magnitude(450e6, 450e6, 1050e6, 3));
  if (std::abs(edge_db - (-3.01)) > 0.05) {
    msg = "band-edge gain " + std::to_string(edge_db) + " dB";
    return false;
  }
  return true;
}

// ---- criterion 9: determinism ------------------------------------------------

bool check_determinism(std::string& msg) {
  const auto sc = load_scenario(kData / "scenarios" / "incubator_heating_detected.json");
  const auto dir = fs::temp_directory_path() / "emirect_acceptance_det";
  fs::create_directories(dir);
  const auto r1 = simulate(sc);
  const auto r2 = simulate(sc);
  write_trace_csv(r1.trace, dir / "a.csv");
  write_trace_csv(r2.trace, dir / "b.csv");
  std::ifstream a(dir / "a.csv", std::ios::binary), b(dir / "b.csv", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  if (sa != sb || sa.empty()) {
    msg = "re-run with the same seed produced a different trace file";
    return false;
  }
  return true;
}

} // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"1. rectification laws (quadratic, linear-in-power, 37.9 uA spot)", 1.0,
       check_rectification},
      {"2. propagation laws (inverse-square, frequency-square, 3.47 mW spot)", 1.0,
       check_propagation},
      {"3. sensor round trip < 0.01 C on 100-point grids", 1.0, check_sensor_round_trip},
      {"4. device summary-table regression (+-5%, distances +-10%)", 10.0,
       check_table_regression},
      {"5a. incubator heating: >= 38.4 C in <= 10 min, zero alarms", 5.0, check_heating},
      {"5b. incubator cooling: <= 29.5 C in <= 35 min, zero alarms", 5.0, check_cooling},
      {"6. alarm predicate boundaries (strict limits, probe fault)", 1.0,
       check_alarm_boundaries},
      {"7. waveform tracking error <= 0.5 C after settling", 5.0, check_tracking},
      {"8. detector: 1000/1000 hits, <1% false positives, >=40 dB image, -3.01 dB edge", 10.0,
       check_detector},
      {"9. determinism: identical seed, byte-identical trace", 5.0, check_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string msg;
    bool ok = false;
    try {
      ok = c.check(msg);
    } catch (const std::exception& e) {
      msg = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > c.time_budget_s) {
      ok = false;
      msg = "runtime " + std::to_string(elapsed) + " s exceeds budget";
    }
    std::printf("[%s] %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", c.label.c_str(), elapsed,
                msg.empty() ? "" : " -- ", msg.c_str());
    if (!ok) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
