#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "emirect/plant.hpp"
#include "emirect/rng.hpp"
#include "emirect/units.hpp"

namespace emirect {

/// Maximally-flat low-pass magnitude response.
inline double butterworth_lowpass_magnitude(double f_hz, double cutoff_hz, int order) {
  if (order < 1) throw std::domain_error("butterworth: order must be >= 1");
  if (cutoff_hz <= 0.0) throw std::domain_error("butterworth: cutoff must be > 0");
  return 1.0 / std::sqrt(1.0 + std::pow(std::abs(f_hz) / cutoff_hz, 2.0 * order));
}

/// Band-pass magnitude from the low-pass prototype transformation
/// s -> (s^2 + w0^2) / (B s). Gain is 1/sqrt(2) at both band edges.
inline double butterworth_bandpass_magnitude(double f_hz, double low_edge_hz, double high_edge_hz,
                                             int order) {
  if (order < 1) throw std::domain_error("butterworth: order must be >= 1");
  if (!(0.0 < low_edge_hz && low_edge_hz < high_edge_hz))
    throw std::domain_error("butterworth: need 0 < low_edge < high_edge");
  if (f_hz <= 0.0) return 0.0;
  const double x = (f_hz * f_hz - low_edge_hz * high_edge_hz) / (f_hz * (high_edge_hz - low_edge_hz));
  return 1.0 / std::sqrt(1.0 + std::pow(x * x, order));
}

/// Mixer output frequency.
inline double downconvert(double f_in_hz, double lo_hz) {
  if (f_in_hz <= 0.0 || lo_hz <= 0.0) throw std::domain_error("downconvert: frequencies must be > 0");
  return std::abs(f_in_hz - lo_hz);
}

struct AgcConfig {
  double target_dbm = -10.0;
  double gain_range_db = 60.0; // applied gain clamped to +-range
};

/// Superheterodyne detection chain simulated as a frequency-domain power
/// budget: LNA, RF band-pass, image-reject filter, mixer (unity), IF filter,
/// IF amplifier, AGC. Tuning the local oscillator selects the monitored band
/// (wanted input = lo - if, low-side injection).
struct DetectorChain {
  double lna_gain_db = 50.0;
  double rf_low_edge_hz = 450e6;
  double rf_high_edge_hz = 1050e6;
  int rf_order = 3;
  double lo_freq_hz = 903e6;
  double if_freq_hz = 400e6;
  double ir_bandwidth_hz = 200e6; // image-reject band-pass centered on the wanted band
  int ir_order = 3;
  double if_bandwidth_hz = 2e6;
  int if_order = 3;
  double if_gain_db = 100.0;
  double noise_figure_db = 2.5;
  double noise_jitter_db = 2.0; // 1-sigma measurement fluctuation
  AgcConfig agc;
  double threshold_db = 10.0; // margin above the noise floor that declares a detection

  void validate() const {
    if (!(rf_low_edge_hz < rf_high_edge_hz))
      throw std::domain_error("DetectorChain: require rf low edge < high edge");
    if (!(if_freq_hz < rf_low_edge_hz))
      throw std::domain_error("DetectorChain: require if_freq < rf low edge");
    if (lna_gain_db < 0.0 || lna_gain_db > 120.0 || if_gain_db < 0.0 || if_gain_db > 160.0)
      throw std::domain_error("DetectorChain: gain outside physical bounds");
    if (if_bandwidth_hz <= 0.0 || ir_bandwidth_hz <= 0.0)
      throw std::domain_error("DetectorChain: bandwidths must be > 0");
  }

  double wanted_freq_hz() const { return lo_freq_hz - if_freq_hz; }
  double image_freq_hz() const { return lo_freq_hz + if_freq_hz; }
};

/// Thermal noise floor in the given bandwidth, input-referred:
/// -174 dBm/Hz (290 K) + 10 log10(B) + NF.
inline double noise_floor_dbm(const DetectorChain& chain, double bandwidth_hz,
                              double temperature_k = 290.0) {
  if (bandwidth_hz <= 0.0) throw std::domain_error("noise_floor: bandwidth must be > 0");
  if (temperature_k <= 0.0) throw std::domain_error("noise_floor: temperature must be > 0");
  return -174.0 + 10.0 * std::log10(temperature_k / 290.0) + 10.0 * std::log10(bandwidth_hz) +
         chain.noise_figure_db;
}

namespace detail {

/// Signal path gain (dB) from the chain input to the IF output, before AGC.
inline double chain_signal_gain_db(const DetectorChain& chain, double f_in_hz) {
  const double wanted = chain.wanted_freq_hz();
  const double ir_lo = wanted - chain.ir_bandwidth_hz / 2.0;
  const double ir_hi = wanted + chain.ir_bandwidth_hz / 2.0;
  const double f_if = downconvert(f_in_hz, chain.lo_freq_hz);
  const double if_lo = chain.if_freq_hz - chain.if_bandwidth_hz / 2.0;
  const double if_hi = chain.if_freq_hz + chain.if_bandwidth_hz / 2.0;
  double g = chain.lna_gain_db;
  g += 20.0 * std::log10(
           butterworth_bandpass_magnitude(f_in_hz, chain.rf_low_edge_hz, chain.rf_high_edge_hz,
                                          chain.rf_order));
  g += 20.0 * std::log10(butterworth_bandpass_magnitude(f_in_hz, ir_lo, ir_hi, chain.ir_order));
  g += 20.0 * std::log10(butterworth_bandpass_magnitude(f_if, if_lo, if_hi, chain.if_order));
  g += chain.if_gain_db;
  return g;
}

/// Noise floor referred to the IF output (filters are ~unity mid-band for the
/// dominant in-band noise).
inline double output_floor_dbm(const DetectorChain& chain) {
  return noise_floor_dbm(chain, chain.if_bandwidth_hz) + chain.lna_gain_db + chain.if_gain_db;
}

inline double agc_gain_db(const DetectorChain& chain, double level_dbm) {
  return std::clamp(chain.agc.target_dbm - level_dbm, -chain.agc.gain_range_db,
                    chain.agc.gain_range_db);
}

} // namespace detail

/// Power at the IF output (dBm) for a single tone of `p_in_w` at `f_in_hz`,
/// including the chain's own noise floor and AGC compression. Deterministic.
inline double chain_power(double f_in_hz, double p_in_w, const DetectorChain& chain) {
  chain.validate();
  if (p_in_w < 0.0) throw std::domain_error("chain_power: power must be >= 0");
  const double floor_out = detail::output_floor_dbm(chain);
  double total = floor_out;
  if (p_in_w > 0.0) {
    const double sig = watts_to_dbm(p_in_w) + detail::chain_signal_gain_db(chain, f_in_hz);
    total = power_sum_dbm(sig, floor_out);
  }
  return total + detail::agc_gain_db(chain, total);
}

/// One tone of the detector's RF environment.
struct EmiTone {
  double frequency_hz = 0.0;
  double power_w = 0.0; // received power at the detector tap
};

struct DetectionReport {
  bool detected = false;
  std::pair<double, double> band_estimate_hz{0.0, 0.0};
  double power_estimate_dbm = -std::numeric_limits<double>::infinity();
  Reliability reliability = Reliability::trusted;
};

/// Compares the IF output power against noise floor + threshold with one
/// seeded measurement-noise sample. detected implies reliability == suspect.
inline DetectionReport detect(const std::vector<EmiTone>& environment, const DetectorChain& chain,
                              Rng& rng) {
  chain.validate();
  const double floor_out = detail::output_floor_dbm(chain);
  const double floor_sample = floor_out + rng.gaussian(0.0, chain.noise_jitter_db);
  double total = floor_sample;
  for (const auto& tone : environment) {
    if (tone.power_w <= 0.0) continue;
    const double sig = watts_to_dbm(tone.power_w) + detail::chain_signal_gain_db(chain, tone.frequency_hz);
    total = power_sum_dbm(total, sig);
  }
  DetectionReport report;
  report.detected = total > floor_out + chain.threshold_db;
  report.reliability = report.detected ? Reliability::suspect : Reliability::trusted;
  const double wanted = chain.wanted_freq_hz();
  report.band_estimate_hz = {wanted - chain.if_bandwidth_hz / 2.0,
                             wanted + chain.if_bandwidth_hz / 2.0};
  report.power_estimate_dbm = total + detail::agc_gain_db(chain, total);
  return report;
}

inline DetectionReport detect(const std::vector<EmiTone>& environment, const DetectorChain& chain,
                              std::uint64_t seed) {
  Rng rng(seed);
  return detect(environment, chain, rng);
}

/// Steps the local oscillator over `lo_schedule_hz` and runs one detection per
/// stop. The union of suspect flags drives the controller's safe-mode input.
inline std::vector<DetectionReport> scan_bands(DetectorChain chain,
                                               const std::vector<double>& lo_schedule_hz,
                                               const std::vector<EmiTone>& environment, Rng& rng) {
  if (lo_schedule_hz.empty()) throw std::domain_error("scan_bands: empty LO schedule");
  std::vector<DetectionReport> out;
  out.reserve(lo_schedule_hz.size());
  for (double lo : lo_schedule_hz) {
    chain.lo_freq_hz = lo;
    out.push_back(detect(environment, chain, rng));
  }
  return out;
}

} // namespace emirect
