#include "fbench/snr.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fbench/errors.hpp"

namespace fbench {

void InstrumentSpec::validate() const {
  for (double v : {v_full_scale, i_full_scale, i_set_pulse, i_set_capacity, delta_v_meas, capacity_hours}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("instrument: full scales, set points and durations must be positive");
  }
  for (double p : {v_precision, i_precision}) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("instrument: precisions must lie in [0, 1) percent");
  }
}

InstrumentSpec InstrumentSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instrument file '" + path + "'");
  InstrumentSpec s;
  try {
    nlohmann::json j;
    in >> j;
    auto take = [&](const char* key, double& field) {
      if (j.contains(key)) field = j.at(key).get<double>();
    };
    take("v_precision", s.v_precision);
    take("v_full_scale", s.v_full_scale);
    take("i_precision", s.i_precision);
    take("i_full_scale", s.i_full_scale);
    take("i_set_pulse", s.i_set_pulse);
    take("i_set_capacity", s.i_set_capacity);
    take("delta_v_meas", s.delta_v_meas);
    take("capacity_hours", s.capacity_hours);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad instrument file '" + path + "': " + e.what());
  }
  s.validate();
  return s;
}

ResolutionLimits resolution_limits(const InstrumentSpec& spec) {
  spec.validate();
  ResolutionLimits l;
  l.i_err = spec.i_full_scale * spec.i_precision / 100.0;
  l.v_err = spec.v_full_scale * spec.v_precision / 100.0;
  if (!(spec.i_set_pulse > l.i_err)) throw DomainError("degenerate instrument: pulse current within the current error");
  const double r_high = (spec.delta_v_meas + l.v_err) / (spec.i_set_pulse - l.i_err);
  const double r_low = (spec.delta_v_meas - l.v_err) / (spec.i_set_pulse + l.i_err);
  l.r_limit = r_high - r_low;
  const double q_high = (spec.i_set_capacity + l.i_err) * spec.capacity_hours;
  const double q_low = (spec.i_set_capacity - l.i_err) * spec.capacity_hours;
  l.q_limit = q_high - q_low;
  return l;
}

ResolutionReport qlli_resolution(const ResolutionLimits& limits, double sens_r, double sens_qd) {
  if (!(sens_r >= 0.0 && sens_qd >= 0.0)) throw ConfigError("sensitivities must be non-negative");
  ResolutionReport r;
  r.limits = limits;
  r.sens_r = sens_r;
  r.sens_qd = sens_qd;
  r.qlli_res_via_r = sens_r * limits.r_limit;
  r.qlli_res_via_qd = sens_qd * limits.q_limit;
  r.improvement_ratio =
      r.qlli_res_via_r > 0.0 ? r.qlli_res_via_qd / r.qlli_res_via_r : std::numeric_limits<double>::infinity();
  return r;
}

std::string report_json(const InstrumentSpec& spec, const ResolutionReport& r) {
  nlohmann::ordered_json j;
  j["instrument"] = {{"v_precision", spec.v_precision},     {"v_full_scale", spec.v_full_scale},
                     {"i_precision", spec.i_precision},     {"i_full_scale", spec.i_full_scale},
                     {"i_set_pulse", spec.i_set_pulse},     {"i_set_capacity", spec.i_set_capacity},
                     {"delta_v_meas", spec.delta_v_meas},   {"capacity_hours", spec.capacity_hours}};
  j["i_err"] = r.limits.i_err;
  j["v_err"] = r.limits.v_err;
  j["r_limit"] = r.limits.r_limit;
  j["q_limit"] = r.limits.q_limit;
  j["sens_r"] = r.sens_r;
  j["sens_qd"] = r.sens_qd;
  j["qlli_res_via_r"] = r.qlli_res_via_r;
  j["qlli_res_via_qd"] = r.qlli_res_via_qd;
  // JSON has no infinity; a zero resistance route reports null.
  if (std::isfinite(r.improvement_ratio)) {
    j["improvement_ratio"] = r.improvement_ratio;
  } else {
    j["improvement_ratio"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string derivation_table(const InstrumentSpec& spec, const ResolutionReport& r) {
  std::ostringstream os;
  auto line = [&](const char* name, const char* formula, double value, const char* unit) {
    char row[200];
    std::snprintf(row, sizeof row, "%-16s %-54s %10.4f %s\n", name, formula, value, unit);
    os << row;
  };
  char buf[96];
  os << "quantity         formula                                                     value unit\n";
  line("i_err", "I_FSR * I_p / 100", r.limits.i_err * 1e3, "mA");
  line("v_err", "V_FSR * V_p / 100", r.limits.v_err * 1e3, "mV");
  line("r_limit", "(dV+V_err)/(I_set1-I_err) - (dV-V_err)/(I_set1+I_err)", r.limits.r_limit * 1e3, "mOhm");
  std::snprintf(buf, sizeof buf, "(I_set2+I_err)*%gh - (I_set2-I_err)*%gh", spec.capacity_hours, spec.capacity_hours);
  line("q_limit", buf, r.limits.q_limit * 1e3, "mAh");
  line("sens_r", "dQ_LLI / dR_LS", r.sens_r, "mAh/mOhm");
  line("sens_qd", "dQ_LLI / dQ_d", r.sens_qd, "mAh/mAh");
  line("q_lli via R_LS", "sens_r * r_limit", r.qlli_res_via_r * 1e3, "mAh");
  line("q_lli via Q_d", "sens_qd * q_limit", r.qlli_res_via_qd * 1e3, "mAh");
  line("improvement", "via Q_d / via R_LS", r.improvement_ratio, "x");
  return os.str();
}

}  // namespace fbench
