// Command-line front end: scenario runs, campaigns, conducted sweeps,
// profile calibration and detector evaluation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emirect/campaign.hpp"
#include "emirect/simulation.hpp"

namespace fs = std::filesystem;
using namespace emirect;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

fs::path resolve_profile_arg(const std::string& arg, const std::optional<fs::path>& profiles_dir) {
  if (fs::exists(arg)) return arg;
  const fs::path base = profiles_dir.value_or(fs::path("data/profiles"));
  const fs::path candidate = base / (arg + ".json");
  if (fs::exists(candidate)) return candidate;
  throw ProfileError("profile '" + arg + "' not found (tried " + candidate.string() + ")");
}

std::vector<fs::path> scenario_files_in(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

void print_run_summary(const Scenario& sc, const RunResult& run) {
  std::printf("scenario %s: %zu ticks", sc.name.c_str(), run.trace.rows.size());
  if (!run.trace.rows.empty()) {
    const auto& last = run.trace.rows.back();
    std::printf(", final actual %.2f C, final measured %.2f C", last.actual_air_c,
                last.measured_skin_c);
  }
  std::printf(", alarms %s", run.trace.any_alarm() ? "raised" : "none");
  if (run.ramp) {
    std::printf(", ramp %s", run.ramp->shortfall ? "shortfall" : "complete");
    if (!run.ramp->note.empty()) std::printf(" (%s)", run.ramp->note.c_str());
  }
  if (run.track)
    std::printf(", tracking carrier %.0f MHz, %d clamped ticks", run.track->frequency_hz / 1e6,
                run.track->clamped_ticks);
  if (run.fault)
    std::printf(", fault injection %s at %.0f MHz", run.fault->success ? "succeeded" : "failed",
                run.fault->frequency_hz / 1e6);
  if (run.tuning) {
    if (run.tuning->positive)
      std::printf(", tuned +%.1f C at %.0f MHz", run.tuning->positive->delta_t_c,
                  run.tuning->positive->frequency_hz / 1e6);
    if (run.tuning->negative)
      std::printf(", tuned %.1f C at %.0f MHz", run.tuning->negative->delta_t_c,
                  run.tuning->negative->frequency_hz / 1e6);
  }
  std::printf("\n");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMI rectification attack simulator for temperature-based control systems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = "out";
  std::string format = "csv";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> profiles_dir_arg;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", format, "Output format (csv)")->capture_default_str();
  app.add_option("--seed", seed_override, "Override the scenario seed");
  app.add_option("--profiles", profiles_dir_arg, "Profile library directory");

  std::string run_scenario_path;
  auto* cmd_run = app.add_subcommand("run", "Run one scenario and write its trace");
  cmd_run->add_option("scenario", run_scenario_path, "Scenario file")->required();

  std::string campaign_dir;
  auto* cmd_campaign = app.add_subcommand("campaign", "Run every scenario in a directory");
  cmd_campaign->add_option("dir", campaign_dir, "Scenario directory")->required();

  std::string sweep_profile;
  double sweep_from = 10e6, sweep_to = 1.5e9, sweep_step = 10e6, sweep_power = 0.032;
  auto* cmd_sweep = app.add_subcommand("sweep", "Conducted-injection frequency sweep of a profile");
  cmd_sweep->add_option("profile", sweep_profile, "Profile id or file")->required();
  cmd_sweep->add_option("--from", sweep_from, "Start frequency, Hz")->capture_default_str();
  cmd_sweep->add_option("--to", sweep_to, "End frequency, Hz")->capture_default_str();
  cmd_sweep->add_option("--step", sweep_step, "Step, Hz")->capture_default_str();
  cmd_sweep->add_option("--power", sweep_power, "Injected power, W")->capture_default_str();

  std::string calibrate_profile_arg;
  auto* cmd_calibrate =
      app.add_subcommand("calibrate", "Solve anchor couplings and write the calibrated profile");
  cmd_calibrate->add_option("profile", calibrate_profile_arg, "Profile id or file")->required();

  std::string eval_scenario_path;
  int eval_trials = 1000;
  auto* cmd_eval = app.add_subcommand("detect-eval", "Monte-Carlo detector evaluation");
  cmd_eval->add_option("scenario", eval_scenario_path, "Scenario file")->required();
  cmd_eval->add_option("--trials", eval_trials, "Number of seeded trials")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (format != "csv") {
    std::fprintf(stderr, "error: unsupported format '%s' (only csv)\n", format.c_str());
    return kExitValidation;
  }
  const std::optional<fs::path> profiles_dir =
      profiles_dir_arg ? std::optional<fs::path>(*profiles_dir_arg) : std::nullopt;

  try {
    fs::create_directories(out_dir);

    if (*cmd_run) {
      Scenario sc = load_scenario(run_scenario_path, profiles_dir);
      if (seed_override) sc.seed = *seed_override;
      if (sc.kind == ScenarioKind::characterize) {
        CampaignResult result;
        result.rows.push_back(characterize_device(calibrate_device(sc.profile), sc.characterize));
        const auto path = fs::path(out_dir) / (sc.name + "_summary.csv");
        atomic_write_file(path, campaign_summary_csv(result));
        std::printf("wrote %s\n", path.c_str());
        return kExitOk;
      }
      const RunResult run = simulate(sc);
      const auto trace_path = fs::path(out_dir) / (sc.name + "_trace.csv");
      write_trace_csv(run.trace, trace_path);
      print_run_summary(sc, run);
      std::printf("wrote %s\n", trace_path.c_str());
      if (run.ramp || run.track) {
        const auto plan = run.ramp ? ramp_plan_json(sc.attacker, sc.attacker.goal, *run.ramp)
                                   : track_plan_json(sc.attacker, *run.track);
        const auto plan_path = fs::path(out_dir) / (sc.name + "_attack_plan.json");
        atomic_write_file(plan_path, plan.dump(2) + "\n");
        std::printf("wrote %s\n", plan_path.c_str());
      }
      return kExitOk;
    }

    if (*cmd_campaign) {
      auto files = scenario_files_in(campaign_dir);
      const auto result = run_campaign(files, out_dir, profiles_dir);
      std::printf("campaign: %zu scenarios, %zu summary rows, %zu traces, %zu failures\n",
                  files.size(), result.rows.size(), result.trace_files.size(),
                  result.failures.size());
      for (const auto& f : result.failures) std::fprintf(stderr, "failure: %s\n", f.c_str());
      std::printf("wrote %s/summary.csv\n", out_dir.c_str());
      return result.failures.empty() ? kExitOk : kExitRuntime;
    }

    if (*cmd_sweep) {
      const auto path = resolve_profile_arg(sweep_profile, profiles_dir);
      DeviceProfile dev = calibrate_device(load_profile(path.string()));
      // conducted mode: the sweep injects power directly past the coupling path
      dev.susceptibility = dev.radiated
                               ? specialize_for_distance(dev.susceptibility, 0.0)
                               : specialize_for_distance(dev.susceptibility, 0.0,
                                                         CouplingMode::conducted);
      const auto sweep = dpi_sweep(dev.susceptibility, sweep_from, sweep_to, sweep_step, sweep_power);
      const auto out = fs::path(out_dir) / (dev.device_id + "_sweep.csv");
      atomic_write_file(out, figure_offset_vs_frequency_csv(sweep));
      std::printf("wrote %s (%zu points)\n", out.c_str(), sweep.size());
      return kExitOk;
    }

    if (*cmd_calibrate) {
      const auto path = resolve_profile_arg(calibrate_profile_arg, profiles_dir);
      const DeviceProfile dev = calibrate_device(load_profile(path.string()));
      const auto out = fs::path(out_dir) / (dev.device_id + "_calibrated.json");
      atomic_write_file(out, profile_to_json(dev).dump(2) + "\n");
      for (const auto& a : dev.susceptibility.anchors)
        std::printf("anchor %.0f MHz @ %.2f m: coupling %.6g\n", a.frequency_hz / 1e6,
                    a.distance_m, a.solved_coupling);
      std::printf("wrote %s\n", out.c_str());
      return kExitOk;
    }

    if (*cmd_eval) {
      Scenario sc = load_scenario(eval_scenario_path, profiles_dir);
      if (seed_override) sc.seed = *seed_override;
      if (!sc.detector.enabled) {
        std::fprintf(stderr, "error: scenario has no detector block\n");
        return kExitValidation;
      }
      if (!sc.attacker.tuned_freq_hz) {
        std::fprintf(stderr, "error: scenario has no tuned attack carrier\n");
        return kExitValidation;
      }
      const double freq = *sc.attacker.tuned_freq_hz;
      const double p_recv =
          friis_received_power(freq, sc.attacker.power_budget_w, sc.geometry.distance_m, 1.0,
                               sc.geometry.rx_antenna_gain, sc.geometry.obstacle_attenuation_db);
      const std::vector<EmiTone> attack{{freq, p_recv}};
      int hits = 0, false_positives = 0;
      for (int i = 0; i < eval_trials; ++i) {
        if (detect(attack, sc.detector.chain, sc.seed + i).detected) ++hits;
        if (detect({}, sc.detector.chain, sc.seed + 500000 + i).detected) ++false_positives;
      }
      std::printf("detect-eval %s: carrier %.0f MHz, received %.3g W\n", sc.name.c_str(),
                  freq / 1e6, p_recv);
      std::printf("detection rate: %d/%d\nfalse-positive rate: %d/%d\n", hits, eval_trials,
                  false_positives, eval_trials);
      return kExitOk;
    }
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitValidation;
  } catch (const ProfileError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const CalibrationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
