#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "emirect/plant.hpp"

namespace emirect {

/// One simulation tick, in the column order of the trace CSV.
struct TraceRow {
  double t_s = 0.0;
  double actual_air_c = 0.0;
  double actual_skin_c = 0.0;
  double measured_skin_c = 0.0;
  double measured_air_c = 0.0;
  double heater_duty = 0.0;
  double cooler_duty = 0.0;
  AlarmSet alarms;
  Reliability detector_flag = Reliability::trusted;
  double attack_freq_hz = 0.0;
  double attack_power_w = 0.0;
};

struct Trace {
  std::vector<TraceRow> rows;

  static constexpr const char* kHeader =
      "t_s,actual_air_c,actual_skin_c,measured_skin_c,measured_air_c,heater_duty,cooler_duty,"
      "alarms,detector_flag,attack_freq_hz,attack_power_w";

  bool any_alarm() const {
    for (const auto& r : rows)
      if (r.alarms.any()) return true;
    return false;
  }
};

inline std::string format_trace_row(const TraceRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.3f,%.5f,%.5f,%.5f,%.5f,%.4f,%.4f,%s,%s,%.0f,%.6f", r.t_s,
                r.actual_air_c, r.actual_skin_c, r.measured_skin_c, r.measured_air_c,
                r.heater_duty, r.cooler_duty, r.alarms.to_string().c_str(),
                reliability_name(r.detector_flag).c_str(), r.attack_freq_hz, r.attack_power_w);
  return buf;
}

/// Writes content to a temporary sibling and renames it into place, so an
/// aborted run never leaves a truncated file behind.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string trace_to_csv(const Trace& trace) {
  std::string out{Trace::kHeader};
  out += '\n';
  for (const auto& r : trace.rows) {
    out += format_trace_row(r);
    out += '\n';
  }
  return out;
}

inline void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  atomic_write_file(path, trace_to_csv(trace));
}

} // namespace emirect
