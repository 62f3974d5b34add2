#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "emirect/units.hpp"

namespace emirect {

/// Time-varying amplitude scale in [0,1]; instantaneous transmit power is
/// scaled by the square of the envelope.
using Envelope = std::function<double(double)>;

inline Envelope constant_envelope(double level = 1.0) {
  return [level](double) { return level; };
}

/// RF transmitter state: carrier, power budget, antenna gain and the
/// amplitude-modulation envelope.
struct EmiSource {
  double carrier_freq_hz = 0.0;
  double tx_power_w = 0.0;
  double tx_antenna_gain = 1.0; // linear
  Envelope envelope = constant_envelope();

  void validate() const {
    if (carrier_freq_hz <= 0.0) throw std::domain_error("EmiSource: carrier_freq must be > 0");
    if (tx_power_w < 0.0) throw std::domain_error("EmiSource: tx_power must be >= 0");
    if (tx_antenna_gain <= 0.0) throw std::domain_error("EmiSource: tx_antenna_gain must be > 0");
  }
};

/// Victim-side link geometry. The obstacle attenuation models e.g. a wall
/// between the transmitter and the victim as a flat dB loss.
struct LinkGeometry {
  double distance_m = 1.0;
  double rx_antenna_gain = 1.0; // linear
  double obstacle_attenuation_db = 0.0;

  void validate() const {
    if (distance_m <= 0.0) throw std::domain_error("LinkGeometry: distance must be > 0");
    if (rx_antenna_gain <= 0.0) throw std::domain_error("LinkGeometry: rx_antenna_gain must be > 0");
    if (obstacle_attenuation_db < 0.0)
      throw std::domain_error("LinkGeometry: obstacle_attenuation must be >= 0");
  }
};

inline double wavelength(double freq_hz) {
  if (freq_hz <= 0.0) throw std::domain_error("wavelength: frequency must be > 0");
  return kSpeedOfLight / freq_hz;
}

/// Free-space received power P_r = G_t G_r (lambda / 4 pi D)^2 P_t, scaled by
/// envelope(t)^2 and the obstacle loss.
inline double received_power(const EmiSource& src, const LinkGeometry& geom, double t_s) {
  src.validate();
  geom.validate();
  const double lam = wavelength(src.carrier_freq_hz);
  const double path = lam / (4.0 * std::numbers::pi * geom.distance_m);
  const double env = src.envelope ? src.envelope(t_s) : 1.0;
  const double p = src.tx_antenna_gain * geom.rx_antenna_gain * path * path * src.tx_power_w *
                   env * env;
  return p * db_to_linear(-geom.obstacle_attenuation_db);
}

/// Received power for a fixed carrier/distance without a full EmiSource,
/// used by calibration and characterization sweeps.
inline double friis_received_power(double freq_hz, double tx_power_w, double distance_m,
                                   double tx_gain = 1.0, double rx_gain = 1.0,
                                   double obstacle_db = 0.0) {
  if (distance_m <= 0.0) throw std::domain_error("friis_received_power: distance must be > 0");
  const double lam = wavelength(freq_hz);
  const double path = lam / (4.0 * std::numbers::pi * distance_m);
  return tx_gain * rx_gain * path * path * tx_power_w * db_to_linear(-obstacle_db);
}

/// Extrapolates the farthest distance at which a measurement shift of
/// `threshold_c` is still inducible, from a measured shift at a known
/// distance, using the inverse-square distance law.
inline double max_effect_distance(double anchor_distance_m, double anchor_delta_t_c,
                                  double threshold_c) {
  if (anchor_distance_m <= 0.0)
    throw std::domain_error("max_effect_distance: anchor distance must be > 0");
  if (anchor_delta_t_c <= 0.0)
    throw std::domain_error("max_effect_distance: anchor delta-T must be > 0");
  if (threshold_c <= 0.0) throw std::domain_error("max_effect_distance: threshold must be > 0");
  return anchor_distance_m * std::sqrt(anchor_delta_t_c / threshold_c);
}

} // namespace emirect
