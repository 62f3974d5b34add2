#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emirect/detector.hpp"
#include "emirect/plant.hpp"
#include "emirect/profile_io.hpp"
#include "emirect/propagation.hpp"

namespace emirect {

constexpr int kScenarioSchemaVersion = 1;

enum class AttackGoalKind {
  none,
  heat_to_limit,
  cool_to_ambient,
  track_waveform,
  suppress_alarm,
  fault_injection,
};

inline std::string goal_name(AttackGoalKind g) {
  switch (g) {
    case AttackGoalKind::none: return "none";
    case AttackGoalKind::heat_to_limit: return "heat_to_limit";
    case AttackGoalKind::cool_to_ambient: return "cool_to_ambient";
    case AttackGoalKind::track_waveform: return "track_waveform";
    case AttackGoalKind::suppress_alarm: return "suppress_alarm";
    case AttackGoalKind::fault_injection: return "fault_injection";
  }
  return "none";
}

inline std::optional<AttackGoalKind> goal_from_name(const std::string& s) {
  if (s == "none") return AttackGoalKind::none;
  if (s == "heat_to_limit") return AttackGoalKind::heat_to_limit;
  if (s == "cool_to_ambient") return AttackGoalKind::cool_to_ambient;
  if (s == "track_waveform") return AttackGoalKind::track_waveform;
  if (s == "suppress_alarm") return AttackGoalKind::suppress_alarm;
  if (s == "fault_injection") return AttackGoalKind::fault_injection;
  return std::nullopt;
}

/// Piecewise-constant target waveform: holds each breakpoint's value until
/// the next breakpoint time.
struct TargetWaveform {
  std::vector<std::pair<double, double>> breakpoints; // (t_s, target_c), sorted by t

  double at(double t_s) const {
    if (breakpoints.empty()) return 0.0;
    double v = breakpoints.front().second;
    for (const auto& [t, target] : breakpoints) {
      if (t > t_s) break;
      v = target;
    }
    return v;
  }
};

struct AttackerScenarioConfig {
  bool enabled = false;
  AttackGoalKind goal = AttackGoalKind::none;
  double power_budget_w = 4.0;
  double freq_lo_hz = 300e6;
  double freq_hi_hz = 1e9;
  double coarse_step_hz = 10e6;
  double fine_step_hz = 1e6;
  double evasion_margin_c = 0.8;
  double dwell_s = 2.0;
  double envelope_slew_per_s = 0.02;
  double feedback_resolution_c = 0.1;
  std::optional<double> tuned_freq_hz;    // carrier selected by a prior tuning session
  std::optional<double> authority_hint_c; // full-budget reading shift measured while tuning
  double limit_c = 38.5;                  // heat_to_limit target (known from device manuals)
  TargetWaveform waveform;                // track_waveform / suppress_alarm target
};

struct DetectorScenarioConfig {
  bool enabled = false;
  DetectorChain chain;
  std::vector<double> lo_schedule_hz;
};

/// Characterization parameters used by campaign summary rows.
struct CharacterizeConfig {
  double tx_power_w = 4.0;
  double distance_m = 0.1;
  double threshold_c = 0.5;
};

enum class ScenarioKind { timeline, characterize };

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  ScenarioKind kind = ScenarioKind::timeline;
  std::string profile_id;
  DeviceProfile profile;
  ThermalPlant plant;
  ControllerConfig controller;
  bool controller_enabled = true;
  AlarmConfig alarms;
  bool alarms_enabled = true;
  AttackerScenarioConfig attacker;
  DetectorScenarioConfig detector;
  LinkGeometry geometry;
  double duration_s = 600.0;
  double dt_s = 0.1;
  std::uint64_t seed = 1;
  std::optional<double> initial_temp_c; // defaults to the controller setpoint
  CharacterizeConfig characterize;

  double initial_temperature() const {
    return initial_temp_c ? *initial_temp_c : controller.setpoint_c;
  }
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> errs)
      : std::runtime_error(join(errs)), errors(std::move(errs)) {}
  std::vector<std::string> errors;

 private:
  static std::string join(const std::vector<std::string>& errs) {
    std::string s = "scenario validation failed:";
    for (const auto& e : errs) {
      s += "\n  - ";
      s += e;
    }
    return s;
  }
};

namespace io {

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  j["kind"] = s.kind == ScenarioKind::characterize ? "characterize" : "timeline";
  j["profile"] = s.profile_id;
  j["plant"] = {{"heat_capacity_j_per_k", s.plant.heat_capacity_j_per_k},
                {"conductance_w_per_k", s.plant.conductance_w_per_k},
                {"heater_max_w", s.plant.heater_max_w},
                {"cooler_max_w", s.plant.cooler_max_w},
                {"ambient_c", s.plant.ambient_c}};
  if (s.plant.coupled)
    j["plant"]["coupled_node"] = {
        {"heat_capacity_j_per_k", s.plant.coupled->heat_capacity_j_per_k},
        {"conductance_w_per_k", s.plant.coupled->conductance_w_per_k}};
  j["controller"] = {
      {"enabled", s.controller_enabled},
      {"mode", s.controller.mode == ControlMode::air_mode ? "air_mode" : "skin_servocontrol"},
      {"setpoint_c", s.controller.setpoint_c},
      {"law", s.controller.law == ControlLaw::on_off ? "on_off" : "pi"},
      {"hysteresis_band_c", s.controller.hysteresis_band_c},
      {"kp", s.controller.kp},
      {"ki", s.controller.ki},
      {"actuator_slew_w_per_s", s.controller.actuator_slew_w_per_s},
      {"safe_mode_on_suspect", s.controller.safe_mode_on_suspect}};
  j["alarms"] = {{"enabled", s.alarms_enabled},
                 {"preset_deviation_limit_c", s.alarms.preset_deviation_limit_c},
                 {"high_air_limit_c", s.alarms.high_air_limit_c},
                 {"probe_fault_enabled", s.alarms.probe_fault_enabled}};
  nlohmann::json ja;
  ja["enabled"] = s.attacker.enabled;
  ja["goal"] = goal_name(s.attacker.goal);
  ja["power_budget_w"] = s.attacker.power_budget_w;
  ja["freq_range_hz"] = {s.attacker.freq_lo_hz, s.attacker.freq_hi_hz};
  ja["coarse_step_hz"] = s.attacker.coarse_step_hz;
  ja["fine_step_hz"] = s.attacker.fine_step_hz;
  ja["evasion_margin_c"] = s.attacker.evasion_margin_c;
  ja["dwell_s"] = s.attacker.dwell_s;
  ja["envelope_slew_per_s"] = s.attacker.envelope_slew_per_s;
  ja["feedback_resolution_c"] = s.attacker.feedback_resolution_c;
  if (s.attacker.tuned_freq_hz) ja["tuned_freq_hz"] = *s.attacker.tuned_freq_hz;
  if (s.attacker.authority_hint_c) ja["authority_hint_c"] = *s.attacker.authority_hint_c;
  ja["limit_c"] = s.attacker.limit_c;
  if (!s.attacker.waveform.breakpoints.empty()) {
    nlohmann::json jw = nlohmann::json::array();
    for (const auto& [t, v] : s.attacker.waveform.breakpoints) jw.push_back({t, v});
    ja["waveform"] = jw;
  }
  j["attacker"] = ja;
  nlohmann::json jd;
  jd["enabled"] = s.detector.enabled;
  jd["lna_gain_db"] = s.detector.chain.lna_gain_db;
  jd["rf_band_hz"] = {s.detector.chain.rf_low_edge_hz, s.detector.chain.rf_high_edge_hz};
  jd["lo_freq_hz"] = s.detector.chain.lo_freq_hz;
  jd["if_freq_hz"] = s.detector.chain.if_freq_hz;
  jd["ir_bandwidth_hz"] = s.detector.chain.ir_bandwidth_hz;
  jd["if_bandwidth_hz"] = s.detector.chain.if_bandwidth_hz;
  jd["if_gain_db"] = s.detector.chain.if_gain_db;
  jd["noise_figure_db"] = s.detector.chain.noise_figure_db;
  jd["noise_jitter_db"] = s.detector.chain.noise_jitter_db;
  jd["agc_target_dbm"] = s.detector.chain.agc.target_dbm;
  jd["agc_gain_range_db"] = s.detector.chain.agc.gain_range_db;
  jd["threshold_db"] = s.detector.chain.threshold_db;
  jd["lo_schedule_hz"] = s.detector.lo_schedule_hz;
  j["detector"] = jd;
  j["geometry"] = {{"distance_m", s.geometry.distance_m},
                   {"rx_antenna_gain", s.geometry.rx_antenna_gain},
                   {"obstacle_attenuation_db", s.geometry.obstacle_attenuation_db}};
  j["duration_s"] = s.duration_s;
  j["dt_s"] = s.dt_s;
  j["seed"] = s.seed;
  if (s.initial_temp_c) j["initial_temp_c"] = *s.initial_temp_c;
  j["characterize"] = {{"tx_power_w", s.characterize.tx_power_w},
                       {"distance_m", s.characterize.distance_m},
                       {"threshold_c", s.characterize.threshold_c}};
  return j;
}

} // namespace io

/// Locates `<id>.json` next to the scenario file, in a sibling profiles/
/// directory, or in an explicit override directory.
inline std::optional<std::filesystem::path> resolve_profile_path(
    const std::string& profile_id, const std::filesystem::path& scenario_dir,
    const std::optional<std::filesystem::path>& profiles_dir) {
  std::vector<std::filesystem::path> candidates;
  if (profiles_dir) candidates.push_back(*profiles_dir / (profile_id + ".json"));
  candidates.push_back(scenario_dir / (profile_id + ".json"));
  candidates.push_back(scenario_dir / ".." / "profiles" / (profile_id + ".json"));
  candidates.push_back(scenario_dir / "profiles" / (profile_id + ".json"));
  for (const auto& c : candidates)
    if (std::filesystem::exists(c)) return c;
  return std::nullopt;
}

/// Parses and fully validates a scenario file, reporting every validation
/// problem found rather than only the first.
inline Scenario load_scenario(const std::filesystem::path& path,
                              std::optional<std::filesystem::path> profiles_dir = std::nullopt) {
  std::vector<std::string> errors;
  const std::string ctx = path.string();
  std::ifstream in(path);
  if (!in) throw ScenarioError({ctx + ": cannot open scenario file"});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError({ctx + ": parse error: " + e.what()});
  }

  Scenario s;
  const auto err = [&errors, &ctx](const std::string& msg) { errors.push_back(ctx + ": " + msg); };

  try {
    s.schema_version = j.at("schema_version").get<int>();
    if (s.schema_version != kScenarioSchemaVersion)
      err("unsupported scenario schema_version " + std::to_string(s.schema_version));
  } catch (const nlohmann::json::exception&) {
    err("missing mandatory field schema_version");
  }
  s.name = j.value("name", path.stem().string());
  const std::string kind = j.value("kind", std::string("timeline"));
  if (kind == "characterize")
    s.kind = ScenarioKind::characterize;
  else if (kind == "timeline")
    s.kind = ScenarioKind::timeline;
  else
    err("unknown scenario kind '" + kind + "'");

  if (!j.contains("profile")) {
    err("missing profile reference");
  } else {
    s.profile_id = j["profile"].get<std::string>();
    const auto ppath = resolve_profile_path(s.profile_id, path.parent_path(), profiles_dir);
    if (!ppath) {
      err("unknown profile id '" + s.profile_id + "' (no profile file found)");
    } else {
      try {
        s.profile = load_profile(ppath->string());
      } catch (const ProfileError& e) {
        err(std::string("profile load failed: ") + e.what());
      }
    }
  }

  if (j.contains("plant")) {
    const auto& jp = j["plant"];
    s.plant.heat_capacity_j_per_k = jp.value("heat_capacity_j_per_k", s.plant.heat_capacity_j_per_k);
    s.plant.conductance_w_per_k = jp.value("conductance_w_per_k", s.plant.conductance_w_per_k);
    s.plant.heater_max_w = jp.value("heater_max_w", s.plant.heater_max_w);
    s.plant.cooler_max_w = jp.value("cooler_max_w", s.plant.cooler_max_w);
    s.plant.ambient_c = jp.value("ambient_c", s.plant.ambient_c);
    if (jp.contains("coupled_node")) {
      ThermalPlant::CoupledNode n;
      n.heat_capacity_j_per_k =
          jp["coupled_node"].value("heat_capacity_j_per_k", n.heat_capacity_j_per_k);
      n.conductance_w_per_k = jp["coupled_node"].value("conductance_w_per_k", n.conductance_w_per_k);
      s.plant.coupled = n;
    }
  }
  try {
    s.plant.validate();
  } catch (const std::domain_error& e) {
    err(e.what());
  }

  if (j.contains("controller")) {
    const auto& jc = j["controller"];
    s.controller_enabled = jc.value("enabled", true);
    s.controller.mode = jc.value("mode", std::string("skin_servocontrol")) == "air_mode"
                            ? ControlMode::air_mode
                            : ControlMode::skin_servocontrol;
    s.controller.setpoint_c = jc.value("setpoint_c", s.controller.setpoint_c);
    s.controller.law =
        jc.value("law", std::string("pi")) == "on_off" ? ControlLaw::on_off : ControlLaw::pi;
    s.controller.hysteresis_band_c = jc.value("hysteresis_band_c", s.controller.hysteresis_band_c);
    s.controller.kp = jc.value("kp", s.controller.kp);
    s.controller.ki = jc.value("ki", s.controller.ki);
    s.controller.actuator_slew_w_per_s =
        jc.value("actuator_slew_w_per_s", s.controller.actuator_slew_w_per_s);
    s.controller.safe_mode_on_suspect =
        jc.value("safe_mode_on_suspect", s.controller.safe_mode_on_suspect);
  }
  if (s.controller_enabled) {
    try {
      s.controller.validate();
    } catch (const std::domain_error& e) {
      err(e.what());
    }
  }

  if (j.contains("alarms")) {
    const auto& jl = j["alarms"];
    s.alarms_enabled = jl.value("enabled", true);
    s.alarms.preset_deviation_limit_c =
        jl.value("preset_deviation_limit_c", s.alarms.preset_deviation_limit_c);
    s.alarms.high_air_limit_c = jl.value("high_air_limit_c", s.alarms.high_air_limit_c);
    s.alarms.probe_fault_enabled = jl.value("probe_fault_enabled", s.alarms.probe_fault_enabled);
  }
  if (s.alarms_enabled) {
    try {
      s.alarms.validate();
    } catch (const std::domain_error& e) {
      err(e.what());
    }
  }

  if (j.contains("attacker")) {
    const auto& ja = j["attacker"];
    s.attacker.enabled = ja.value("enabled", true);
    if (const auto g = goal_from_name(ja.value("goal", std::string("none"))))
      s.attacker.goal = *g;
    else
      err("unknown attacker goal '" + ja.value("goal", std::string{}) + "'");
    s.attacker.power_budget_w = ja.value("power_budget_w", s.attacker.power_budget_w);
    if (ja.contains("freq_range_hz")) {
      s.attacker.freq_lo_hz = ja["freq_range_hz"].at(0).get<double>();
      s.attacker.freq_hi_hz = ja["freq_range_hz"].at(1).get<double>();
    }
    s.attacker.coarse_step_hz = ja.value("coarse_step_hz", s.attacker.coarse_step_hz);
    s.attacker.fine_step_hz = ja.value("fine_step_hz", s.attacker.fine_step_hz);
    s.attacker.evasion_margin_c = ja.value("evasion_margin_c", s.attacker.evasion_margin_c);
    s.attacker.dwell_s = ja.value("dwell_s", s.attacker.dwell_s);
    s.attacker.envelope_slew_per_s =
        ja.value("envelope_slew_per_s", s.attacker.envelope_slew_per_s);
    s.attacker.feedback_resolution_c =
        ja.value("feedback_resolution_c", s.attacker.feedback_resolution_c);
    if (ja.contains("tuned_freq_hz")) s.attacker.tuned_freq_hz = ja["tuned_freq_hz"].get<double>();
    if (ja.contains("authority_hint_c"))
      s.attacker.authority_hint_c = ja["authority_hint_c"].get<double>();
    s.attacker.limit_c = ja.value("limit_c", s.attacker.limit_c);
    for (const auto& bp : ja.value("waveform", nlohmann::json::array()))
      s.attacker.waveform.breakpoints.emplace_back(bp.at(0).get<double>(),
                                                   bp.at(1).get<double>());
    if (s.attacker.enabled) {
      if (s.attacker.power_budget_w <= 0.0) err("attacker power budget must be > 0");
      if (!(s.attacker.fine_step_hz < s.attacker.coarse_step_hz))
        err("attacker fine_step must be smaller than coarse_step");
      if (s.attacker.goal != AttackGoalKind::fault_injection &&
          s.attacker.goal != AttackGoalKind::none) {
        if (s.alarms_enabled && !(s.attacker.evasion_margin_c > 0.0 &&
                                  s.attacker.evasion_margin_c < s.alarms.preset_deviation_limit_c))
          err("attacker evasion margin must lie in (0, preset_deviation_limit)");
      }
      if (s.attacker.goal == AttackGoalKind::track_waveform) {
        if (s.attacker.waveform.breakpoints.empty())
          err("track_waveform goal needs a waveform");
        for (const auto& [t, v] : s.attacker.waveform.breakpoints)
          if (v < s.profile.display_min_c || v > s.profile.display_max_c)
            err("waveform target " + std::to_string(v) + " C outside the reportable range");
      }
    }
  }

  if (j.contains("detector")) {
    const auto& jd = j["detector"];
    s.detector.enabled = jd.value("enabled", true);
    auto& ch = s.detector.chain;
    ch.lna_gain_db = jd.value("lna_gain_db", ch.lna_gain_db);
    if (jd.contains("rf_band_hz")) {
      ch.rf_low_edge_hz = jd["rf_band_hz"].at(0).get<double>();
      ch.rf_high_edge_hz = jd["rf_band_hz"].at(1).get<double>();
    }
    ch.lo_freq_hz = jd.value("lo_freq_hz", ch.lo_freq_hz);
    ch.if_freq_hz = jd.value("if_freq_hz", ch.if_freq_hz);
    ch.ir_bandwidth_hz = jd.value("ir_bandwidth_hz", ch.ir_bandwidth_hz);
    ch.if_bandwidth_hz = jd.value("if_bandwidth_hz", ch.if_bandwidth_hz);
    ch.if_gain_db = jd.value("if_gain_db", ch.if_gain_db);
    ch.noise_figure_db = jd.value("noise_figure_db", ch.noise_figure_db);
    ch.noise_jitter_db = jd.value("noise_jitter_db", ch.noise_jitter_db);
    ch.agc.target_dbm = jd.value("agc_target_dbm", ch.agc.target_dbm);
    ch.agc.gain_range_db = jd.value("agc_gain_range_db", ch.agc.gain_range_db);
    ch.threshold_db = jd.value("threshold_db", ch.threshold_db);
    for (const auto& lo : jd.value("lo_schedule_hz", nlohmann::json::array()))
      s.detector.lo_schedule_hz.push_back(lo.get<double>());
    if (s.detector.enabled) {
      if (s.detector.lo_schedule_hz.empty())
        s.detector.lo_schedule_hz.push_back(ch.lo_freq_hz);
      try {
        ch.validate();
      } catch (const std::domain_error& e) {
        err(e.what());
      }
    }
  }

  if (j.contains("geometry")) {
    const auto& jg = j["geometry"];
    s.geometry.distance_m = jg.value("distance_m", s.geometry.distance_m);
    s.geometry.rx_antenna_gain = jg.value("rx_antenna_gain", s.geometry.rx_antenna_gain);
    s.geometry.obstacle_attenuation_db =
        jg.value("obstacle_attenuation_db", s.geometry.obstacle_attenuation_db);
  }
  try {
    s.geometry.validate();
  } catch (const std::domain_error& e) {
    err(e.what());
  }

  s.duration_s = j.value("duration_s", s.duration_s);
  s.dt_s = j.value("dt_s", s.dt_s);
  s.seed = j.value("seed", s.seed);
  if (j.contains("initial_temp_c")) s.initial_temp_c = j["initial_temp_c"].get<double>();
  if (j.contains("characterize")) {
    const auto& jc = j["characterize"];
    s.characterize.tx_power_w = jc.value("tx_power_w", s.characterize.tx_power_w);
    s.characterize.distance_m = jc.value("distance_m", s.characterize.distance_m);
    s.characterize.threshold_c = jc.value("threshold_c", s.characterize.threshold_c);
  }

  if (s.duration_s <= 0.0) err("duration must be > 0");
  if (s.dt_s <= 0.0) {
    err("dt must be > 0");
  } else if (s.kind == ScenarioKind::timeline) {
    const double bound = s.plant.max_stable_dt();
    if (s.dt_s > bound)
      err("dt " + std::to_string(s.dt_s) + " s exceeds the integrator stability bound " +
          std::to_string(bound) + " s for this plant");
  }

  if (!errors.empty()) throw ScenarioError(std::move(errors));
  return s;
}

} // namespace emirect
