#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emirect/simulation.hpp"

namespace emirect {

/// One summary-table row per characterized device.
struct CampaignRow {
  std::string device_id;
  std::string sensor_type;
  std::optional<std::pair<double, double>> dt_max; // (delta-T C, frequency Hz)
  std::optional<std::pair<double, double>> dt_min;
  std::optional<double> max_attack_distance_m;
  bool distance_estimated = false;
};

struct CampaignResult {
  std::vector<CampaignRow> rows;          // sorted by device_id
  std::vector<std::string> trace_files;   // written timeline traces
  std::vector<std::string> failures;      // per-scenario errors; the campaign continues
};

/// Largest reading increase/decrease inducible at the characterization
/// distance and power, scanning the specialized entry table. Faulted
/// readings are disconnections, not temperature shifts, and are excluded.
inline CampaignRow characterize_device(const DeviceProfile& calibrated,
                                       const CharacterizeConfig& cfg) {
  CampaignRow row;
  row.device_id = calibrated.device_id;
  row.sensor_type = calibrated.sensor_type_label;
  row.distance_estimated = calibrated.distance_estimated;

  const auto specialized = specialize_for_distance(calibrated.susceptibility, cfg.distance_m,
                                            CouplingMode::radiated);
  const double base = calibrated.operating_temp_c;
  for (const auto& e : specialized.entries) {
    if (e.coupling == 0.0) continue;
    const double p = friis_received_power(e.frequency_hz, cfg.tx_power_w, cfg.distance_m);
    const double off = offset_at(specialized, e.frequency_hz, p).volts;
    const SensorReading r = device_read(calibrated, base, off);
    if (r.fault != FaultKind::none) continue;
    const double dt = r.reported_temp_c - base;
    if (dt > 0.0 && (!row.dt_max || dt > row.dt_max->first)) row.dt_max = {dt, e.frequency_hz};
    if (dt < 0.0 && (!row.dt_min || dt < row.dt_min->first)) row.dt_min = {dt, e.frequency_hz};
  }

  // Distance column: inverse-square extrapolation from the farthest
  // calibration point (largest shift there when several exist).
  std::optional<SusceptibilityAnchor> far;
  for (const auto& a : calibrated.susceptibility.anchors) {
    if (a.mode != CouplingMode::radiated) continue;
    if (!far || a.distance_m > far->distance_m ||
        (a.distance_m == far->distance_m &&
         std::abs(a.observed_delta_t_c) > std::abs(far->observed_delta_t_c)))
      far = a;
  }
  if (far && std::abs(far->observed_delta_t_c) > 0.0)
    row.max_attack_distance_m =
        max_effect_distance(far->distance_m, std::abs(far->observed_delta_t_c), cfg.threshold_c);
  return row;
}

inline std::string campaign_summary_csv(const CampaignResult& result) {
  std::string out =
      "device_id,sensor_type,dt_max_c,dt_max_freq_mhz,dt_min_c,dt_min_freq_mhz,"
      "max_attack_distance_m,distance_estimated\n";
  char buf[256];
  for (const auto& r : result.rows) {
    std::string dt_max = "N/A", dt_max_f = "N/A", dt_min = "N/A", dt_min_f = "N/A", dist = "N/A";
    if (r.dt_max) {
      std::snprintf(buf, sizeof(buf), "%.3f", r.dt_max->first);
      dt_max = buf;
      std::snprintf(buf, sizeof(buf), "%.1f", r.dt_max->second / 1e6);
      dt_max_f = buf;
    }
    if (r.dt_min) {
      std::snprintf(buf, sizeof(buf), "%.3f", r.dt_min->first);
      dt_min = buf;
      std::snprintf(buf, sizeof(buf), "%.1f", r.dt_min->second / 1e6);
      dt_min_f = buf;
    }
    if (r.max_attack_distance_m) {
      std::snprintf(buf, sizeof(buf), "%.2f", *r.max_attack_distance_m);
      dist = buf;
    }
    out += r.device_id + "," + r.sensor_type + "," + dt_max + "," + dt_max_f + "," + dt_min + "," +
           dt_min_f + "," + dist + "," + (r.distance_estimated ? "yes" : "no") + "\n";
  }
  return out;
}

/// Runs every scenario in the set. Timeline scenarios produce one trace CSV
/// each; characterize scenarios produce summary rows. Independent runs
/// execute concurrently; summary assembly is order-stable, so rerunning the
/// same set yields a byte-identical summary table. Per-scenario failures are
/// recorded and the campaign continues.
inline CampaignResult run_campaign(const std::vector<std::filesystem::path>& scenario_files,
                                   const std::filesystem::path& out_dir,
                                   std::optional<std::filesystem::path> profiles_dir = std::nullopt) {
  std::filesystem::create_directories(out_dir);

  struct Slot {
    std::optional<CampaignRow> row;
    std::optional<std::string> trace_file;
    std::optional<std::string> failure;
  };
  std::vector<std::future<Slot>> futures;
  futures.reserve(scenario_files.size());
  for (const auto& file : scenario_files) {
    futures.push_back(std::async(std::launch::async, [file, out_dir, profiles_dir]() -> Slot {
      Slot slot;
      try {
        Scenario sc = load_scenario(file, profiles_dir);
        if (sc.kind == ScenarioKind::characterize) {
          slot.row = characterize_device(calibrate_device(sc.profile), sc.characterize);
        } else {
          RunResult run = simulate(sc);
          const auto trace_path = out_dir / (sc.name + "_trace.csv");
          write_trace_csv(run.trace, trace_path);
          slot.trace_file = trace_path.string();
        }
      } catch (const std::exception& e) {
        slot.failure = file.string() + ": " + e.what();
      }
      return slot;
    }));
  }

  CampaignResult result;
  for (auto& f : futures) {
    Slot slot = f.get();
    if (slot.row) result.rows.push_back(std::move(*slot.row));
    if (slot.trace_file) result.trace_files.push_back(std::move(*slot.trace_file));
    if (slot.failure) result.failures.push_back(std::move(*slot.failure));
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const CampaignRow& a, const CampaignRow& b) { return a.device_id < b.device_id; });
  atomic_write_file(out_dir / "summary.csv", campaign_summary_csv(result));
  return result;
}

// ---- figure data emission (plot-ready columns; plotting itself is out of scope)

inline std::string figure_offset_vs_frequency_csv(const std::vector<SweepPoint>& sweep) {
  std::string out = "frequency_hz,dc_offset_v\n";
  char buf[128];
  for (const auto& p : sweep) {
    std::snprintf(buf, sizeof(buf), "%.0f,%.9g\n", p.frequency_hz, p.dc_offset_v);
    out += buf;
  }
  return out;
}

/// Induced offset against injected (conducted) power at a fixed frequency.
inline std::string figure_offset_vs_power_csv(const SusceptibilityProfile& profile, double freq_hz,
                                              const std::vector<double>& powers_w) {
  std::string out = "power_w,dc_offset_v\n";
  char buf[128];
  for (double p : powers_w) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", p, offset_at(profile, freq_hz, p).volts);
    out += buf;
  }
  return out;
}

/// Induced reading shift against attack distance at fixed carrier and power,
/// honoring per-distance anchor groups.
inline std::string figure_delta_t_vs_distance_csv(const DeviceProfile& calibrated, double freq_hz,
                                                  double tx_power_w,
                                                  const std::vector<double>& distances_m) {
  std::string out = "distance_m,delta_t_c\n";
  char buf[128];
  for (double d : distances_m) {
    const auto specialized =
        specialize_for_distance(calibrated.susceptibility, d, CouplingMode::radiated);
    const double p = friis_received_power(freq_hz, tx_power_w, d);
    const double off = offset_at(specialized, freq_hz, p).volts;
    const SensorReading r = device_read(calibrated, calibrated.operating_temp_c, off);
    const double dt = r.fault == FaultKind::none
                          ? r.reported_temp_c - calibrated.operating_temp_c
                          : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", d, dt);
    out += buf;
  }
  return out;
}

/// Time series of the attack observables from a finished trace.
inline std::string figure_timeseries_csv(const Trace& trace) {
  std::string out = "t_s,measured_skin_c,actual_air_c,attack_power_w\n";
  char buf[160];
  for (const auto& r : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%.3f,%.5f,%.5f,%.6f\n", r.t_s, r.measured_skin_c,
                  r.actual_air_c, r.attack_power_w);
    out += buf;
  }
  return out;
}

} // namespace emirect
