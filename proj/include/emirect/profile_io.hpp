#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "emirect/rectification.hpp"
#include "emirect/sensors.hpp"

namespace emirect {

constexpr int kProfileSchemaVersion = 1;

struct ProfileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything the harness knows about one device: the sensing chain, the
/// display behavior and the calibrated susceptibility map. The aux coupling
/// scale is the (smaller) fraction of the primary coupling seen by secondary
/// sensors in the same chassis (e.g. the incubator's air and high-limit
/// probes).
struct DeviceProfile {
  int schema_version = kProfileSchemaVersion;
  std::string device_id;
  std::string description;
  std::string sensor_type_label = "NTC"; // NTC/PTC/KTC/KST/RTD/Un for summary tables
  SensorModel sensor = ThermistorModel{};
  AdcModel adc;
  double display_min_c = -50.0;
  double display_max_c = 150.0;
  double display_resolution_c = 0.1;
  double operating_temp_c = 25.0;
  double aux_coupling_scale = 0.0;
  bool radiated = true; // false: conducted (DPI) coupling only
  bool distance_estimated = false;
  SusceptibilityProfile susceptibility;
};

/// Device-level read: sensor chain plus the display clamp. Faulted readings
/// keep the 0 C sentinel unclamped.
inline SensorReading device_read(const DeviceProfile& dev, double true_temp_c, double dc_offset_v) {
  SensorReading r = read(dev.sensor, dev.adc, true_temp_c, dc_offset_v);
  if (r.fault == FaultKind::none)
    r.reported_temp_c = std::clamp(r.reported_temp_c, dev.display_min_c, dev.display_max_c);
  return r;
}

/// What an observer of the front panel sees: the reading quantized to the
/// display resolution.
inline double displayed_temp(const DeviceProfile& dev, const SensorReading& r) {
  if (r.fault != FaultKind::none) return r.reported_temp_c; // sentinel shown as-is
  if (dev.display_resolution_c <= 0.0) return r.reported_temp_c;
  return std::round(r.reported_temp_c / dev.display_resolution_c) * dev.display_resolution_c;
}

/// Rectified offset with the coupling magnitude rescaled, for secondary
/// sensors that share the chassis but couple more weakly.
inline OffsetSample offset_with_scale(const SusceptibilityProfile& p, double freq_hz,
                                      double p_received_w, double coupling_scale) {
  const auto c = coupling_at(p, freq_hz);
  if (!c || coupling_scale == 0.0) return {0.0, c.has_value()};
  const double injected = std::abs(*c * coupling_scale) * p_received_w;
  const double lin = dc_offset_from_power(injected, p.amp);
  return {std::copysign(apply_saturation(lin, p.saturation), *c * coupling_scale), true};
}

namespace io {

using nlohmann::json;

inline json sensor_to_json(const SensorModel& m) {
  json j;
  if (const auto* t = std::get_if<ThermistorModel>(&m)) {
    j["kind"] = "thermistor";
    j["r0_ohm"] = t->r0_ohm;
    j["t0_k"] = t->t0_k;
    j["beta_k"] = t->beta_k;
    j["bridge_excitation_v"] = t->bridge_excitation_v;
    j["bridge_r1_ohm"] = t->bridge_r1_ohm;
    j["bridge_r2_ohm"] = t->bridge_r2_ohm;
    j["bridge_r3_ohm"] = t->bridge_r3_ohm;
    j["amp_gain"] = t->amp_gain;
    j["polarity"] = t->polarity == ThermistorPolarity::ntc ? "ntc" : "ptc";
    j["range_min_c"] = t->range_min_c;
    j["range_max_c"] = t->range_max_c;
  } else if (const auto* t = std::get_if<ThermocoupleModel>(&m)) {
    j["kind"] = "thermocouple";
    j["seebeck_v_per_k"] = t->seebeck_v_per_k;
    j["cjc_reference_c"] = t->cjc_reference_c;
    j["amp_gain"] = t->amp_gain;
    j["shielded"] = t->shielded;
    j["range_min_c"] = t->range_min_c;
    j["range_max_c"] = t->range_max_c;
  } else if (const auto* t = std::get_if<RtdModel>(&m)) {
    j["kind"] = "rtd";
    j["r0_ohm"] = t->r0_ohm;
    j["alpha_per_k"] = t->alpha_per_k;
    j["excitation_a"] = t->excitation_a;
    j["amp_gain"] = t->amp_gain;
    j["range_min_c"] = t->range_min_c;
    j["range_max_c"] = t->range_max_c;
  }
  return j;
}

inline SensorModel sensor_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "thermistor") {
    ThermistorModel t;
    t.r0_ohm = j.value("r0_ohm", t.r0_ohm);
    t.t0_k = j.value("t0_k", t.t0_k);
    t.beta_k = j.value("beta_k", t.beta_k);
    t.bridge_excitation_v = j.value("bridge_excitation_v", t.bridge_excitation_v);
    t.bridge_r1_ohm = j.value("bridge_r1_ohm", t.bridge_r1_ohm);
    t.bridge_r2_ohm = j.value("bridge_r2_ohm", t.bridge_r2_ohm);
    t.bridge_r3_ohm = j.value("bridge_r3_ohm", t.bridge_r3_ohm);
    t.amp_gain = j.value("amp_gain", t.amp_gain);
    t.polarity = j.value("polarity", std::string("ntc")) == "ptc" ? ThermistorPolarity::ptc
                                                                  : ThermistorPolarity::ntc;
    t.range_min_c = j.value("range_min_c", t.range_min_c);
    t.range_max_c = j.value("range_max_c", t.range_max_c);
    return t;
  }
  if (kind == "thermocouple") {
    ThermocoupleModel t;
    t.seebeck_v_per_k = j.value("seebeck_v_per_k", t.seebeck_v_per_k);
    t.cjc_reference_c = j.value("cjc_reference_c", t.cjc_reference_c);
    t.amp_gain = j.value("amp_gain", t.amp_gain);
    t.shielded = j.value("shielded", t.shielded);
    t.range_min_c = j.value("range_min_c", t.range_min_c);
    t.range_max_c = j.value("range_max_c", t.range_max_c);
    return t;
  }
  if (kind == "rtd") {
    RtdModel t;
    t.r0_ohm = j.value("r0_ohm", t.r0_ohm);
    t.alpha_per_k = j.value("alpha_per_k", t.alpha_per_k);
    t.excitation_a = j.value("excitation_a", t.excitation_a);
    t.amp_gain = j.value("amp_gain", t.amp_gain);
    t.range_min_c = j.value("range_min_c", t.range_min_c);
    t.range_max_c = j.value("range_max_c", t.range_max_c);
    return t;
  }
  throw ProfileError("unknown sensor kind '" + kind + "'");
}

inline json amp_to_json(const AmpParams& a) {
  json j;
  if (const auto* b = std::get_if<BjtAmpParams>(&a)) {
    j["kind"] = "bjt";
    j["quiescent_collector_current_a"] = b->quiescent_collector_current_a;
    j["thermal_voltage_v"] = b->thermal_voltage_v;
    j["equivalent_resistance_ohm"] = b->equivalent_resistance_ohm;
  } else if (const auto* f = std::get_if<FetAmpParams>(&a)) {
    j["kind"] = "fet";
    j["zero_bias_drain_current_a"] = f->zero_bias_drain_current_a;
    j["pinch_off_voltage_v"] = f->pinch_off_voltage_v;
    j["equivalent_resistance_ohm"] = f->equivalent_resistance_ohm;
  }
  return j;
}

inline AmpParams amp_from_json(const json& j) {
  const std::string kind = j.value("kind", std::string("bjt"));
  if (kind == "bjt") {
    BjtAmpParams b;
    b.quiescent_collector_current_a =
        j.value("quiescent_collector_current_a", b.quiescent_collector_current_a);
    b.thermal_voltage_v = j.value("thermal_voltage_v", b.thermal_voltage_v);
    b.equivalent_resistance_ohm = j.value("equivalent_resistance_ohm", b.equivalent_resistance_ohm);
    return b;
  }
  if (kind == "fet") {
    FetAmpParams f;
    f.zero_bias_drain_current_a = j.value("zero_bias_drain_current_a", f.zero_bias_drain_current_a);
    f.pinch_off_voltage_v = j.value("pinch_off_voltage_v", f.pinch_off_voltage_v);
    f.equivalent_resistance_ohm = j.value("equivalent_resistance_ohm", f.equivalent_resistance_ohm);
    return f;
  }
  throw ProfileError("unknown amplifier kind '" + kind + "'");
}

} // namespace io

inline nlohmann::json profile_to_json(const DeviceProfile& dev) {
  nlohmann::json j;
  j["schema_version"] = dev.schema_version;
  j["device_id"] = dev.device_id;
  j["description"] = dev.description;
  j["sensor_type_label"] = dev.sensor_type_label;
  j["sensor"] = io::sensor_to_json(dev.sensor);
  j["adc"] = {{"resolution_bits", dev.adc.resolution_bits},
              {"v_ref", dev.adc.v_ref},
              {"valid_min_v", dev.adc.valid_min_v},
              {"valid_max_v", dev.adc.valid_max_v}};
  j["display"] = {{"min_c", dev.display_min_c},
                  {"max_c", dev.display_max_c},
                  {"resolution_c", dev.display_resolution_c}};
  j["operating_temp_c"] = dev.operating_temp_c;
  j["aux_coupling_scale"] = dev.aux_coupling_scale;
  j["radiated"] = dev.radiated;
  j["distance_estimated"] = dev.distance_estimated;
  j["amp"] = io::amp_to_json(dev.susceptibility.amp);
  j["saturation"] = {{"linear_limit_v", dev.susceptibility.saturation.linear_limit_v},
                     {"shape_v", dev.susceptibility.saturation.shape_v}};
  j["lobe_width_hz"] = dev.susceptibility.lobe_width_hz;
  nlohmann::json anchors = nlohmann::json::array();
  for (const auto& a : dev.susceptibility.anchors) {
    nlohmann::json ja = {{"mode", a.mode == CouplingMode::conducted ? "conducted" : "radiated"},
                         {"distance_m", a.distance_m},
                         {"tx_power_w", a.tx_power_w},
                         {"frequency_hz", a.frequency_hz},
                         {"observed_delta_t_c", a.observed_delta_t_c},
                         {"base_temp_c", a.base_temp_c}};
    if (a.calibrated) ja["solved_coupling"] = a.solved_coupling;
    anchors.push_back(ja);
  }
  j["anchors"] = anchors;
  nlohmann::json fixed = nlohmann::json::array();
  for (const auto& e : dev.susceptibility.fixed_entries)
    fixed.push_back({e.frequency_hz, e.coupling});
  j["fixed_entries"] = fixed;
  return j;
}

inline DeviceProfile profile_from_json(const nlohmann::json& j, const std::string& context) {
  DeviceProfile dev;
  try {
    dev.schema_version = j.at("schema_version").get<int>();
    if (dev.schema_version != kProfileSchemaVersion)
      throw ProfileError("unsupported profile schema_version " +
                         std::to_string(dev.schema_version));
    dev.device_id = j.at("device_id").get<std::string>();
    dev.description = j.value("description", std::string{});
    dev.sensor_type_label = j.value("sensor_type_label", dev.sensor_type_label);
    dev.sensor = io::sensor_from_json(j.at("sensor"));
    if (j.contains("adc")) {
      const auto& ja = j["adc"];
      dev.adc.resolution_bits = ja.value("resolution_bits", dev.adc.resolution_bits);
      dev.adc.v_ref = ja.value("v_ref", dev.adc.v_ref);
      dev.adc.valid_min_v = ja.value("valid_min_v", dev.adc.valid_min_v);
      dev.adc.valid_max_v = ja.value("valid_max_v", dev.adc.valid_max_v);
    }
    if (j.contains("display")) {
      const auto& jd = j["display"];
      dev.display_min_c = jd.value("min_c", dev.display_min_c);
      dev.display_max_c = jd.value("max_c", dev.display_max_c);
      dev.display_resolution_c = jd.value("resolution_c", dev.display_resolution_c);
    }
    dev.operating_temp_c = j.value("operating_temp_c", dev.operating_temp_c);
    dev.aux_coupling_scale = j.value("aux_coupling_scale", dev.aux_coupling_scale);
    dev.radiated = j.value("radiated", dev.radiated);
    dev.distance_estimated = j.value("distance_estimated", dev.distance_estimated);
    dev.susceptibility.device_id = dev.device_id;
    if (j.contains("amp")) dev.susceptibility.amp = io::amp_from_json(j["amp"]);
    if (j.contains("saturation")) {
      dev.susceptibility.saturation.linear_limit_v =
          j["saturation"].value("linear_limit_v", dev.susceptibility.saturation.linear_limit_v);
      dev.susceptibility.saturation.shape_v =
          j["saturation"].value("shape_v", dev.susceptibility.saturation.shape_v);
    }
    dev.susceptibility.lobe_width_hz = j.value("lobe_width_hz", dev.susceptibility.lobe_width_hz);
    for (const auto& ja : j.value("anchors", nlohmann::json::array())) {
      SusceptibilityAnchor a;
      a.mode = ja.value("mode", std::string("radiated")) == "conducted" ? CouplingMode::conducted
                                                                        : CouplingMode::radiated;
      a.distance_m = ja.value("distance_m", a.distance_m);
      a.tx_power_w = ja.at("tx_power_w").get<double>();
      a.frequency_hz = ja.at("frequency_hz").get<double>();
      a.observed_delta_t_c = ja.at("observed_delta_t_c").get<double>();
      a.base_temp_c = ja.value("base_temp_c", dev.operating_temp_c);
      if (ja.contains("solved_coupling")) {
        a.solved_coupling = ja["solved_coupling"].get<double>();
        a.calibrated = true;
      }
      dev.susceptibility.anchors.push_back(a);
    }
    for (const auto& je : j.value("fixed_entries", nlohmann::json::array()))
      dev.susceptibility.fixed_entries.push_back(
          {je.at(0).get<double>(), je.at(1).get<double>()});
    if (dev.susceptibility.anchors.empty())
      throw ProfileError("profile needs at least one anchor");
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError(context + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw ProfileError(context + ": " + e.what());
  } catch (const ProfileError& e) {
    throw ProfileError(context + ": " + e.what());
  }
  return dev;
}

inline DeviceProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProfileError(path + ": cannot open profile file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError(path + ": parse error: " + e.what());
  }
  return profile_from_json(j, path);
}

/// Calibrates the embedded susceptibility profile against the device's own
/// sensor model.
inline DeviceProfile calibrate_device(DeviceProfile dev,
                                      std::optional<double> reference_distance_m = std::nullopt) {
  dev.susceptibility =
      calibrate_profile(std::move(dev.susceptibility), dev.sensor, reference_distance_m);
  return dev;
}

} // namespace emirect
