#pragma once

#include <cmath>
#include <stdexcept>

namespace emirect {

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s
inline constexpr double kCelsiusToKelvin = 273.15;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

inline double watts_to_dbm(double watts) {
  if (watts <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(watts * 1e3);
}
inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

inline double celsius_to_kelvin(double c) { return c + kCelsiusToKelvin; }
inline double kelvin_to_celsius(double k) { return k - kCelsiusToKelvin; }

/// Power-domain sum of two levels given in dBm.
inline double power_sum_dbm(double a_dbm, double b_dbm) {
  if (std::isinf(a_dbm) && a_dbm < 0) return b_dbm;
  if (std::isinf(b_dbm) && b_dbm < 0) return a_dbm;
  return watts_to_dbm(dbm_to_watts(a_dbm) + dbm_to_watts(b_dbm));
}

} // namespace emirect
