#pragma once

#include <string>

namespace fbench {

/// Cycler precision and the set points used for the two lithium-loss
/// estimators. Precisions are percent of full scale.
struct InstrumentSpec {
  double v_precision = 0.02;     ///< % of full scale
  double v_full_scale = 5.0;     ///< V
  double i_precision = 0.02;     ///< % of full scale
  double i_full_scale = 5.0;     ///< A
  double i_set_pulse = 2.37;     ///< A, HPPC pulse current
  double i_set_capacity = 0.237; ///< A, capacity-check discharge current
  double delta_v_meas = 0.1;     ///< V, pulse voltage drop
  double capacity_hours = 10.0;  ///< h, duration of the capacity-check discharge

  /// Throws ConfigError unless full scales, set points and durations are
  /// positive and precisions lie in [0, 1).
  void validate() const;
  static InstrumentSpec from_json_file(const std::string& path);
};

struct ResolutionLimits {
  double i_err = 0.0;    ///< A
  double v_err = 0.0;    ///< V
  double r_limit = 0.0;  ///< ohm
  double q_limit = 0.0;  ///< Ah
};

/// Throws DomainError when the pulse current does not exceed the current error.
ResolutionLimits resolution_limits(const InstrumentSpec& spec);

struct ResolutionReport {
  ResolutionLimits limits;
  double sens_r = 0.0;   ///< Ah of lithium per ohm of R_LS
  double sens_qd = 0.0;  ///< Ah of lithium per Ah of discharge capacity
  double qlli_res_via_r = 0.0;   ///< Ah
  double qlli_res_via_qd = 0.0;  ///< Ah
  double improvement_ratio = 0.0;  ///< via_qd / via_r; infinite when via_r is 0
};

/// Throws ConfigError for negative sensitivities.
ResolutionReport qlli_resolution(const ResolutionLimits& limits, double sens_r, double sens_qd);

/// Default sensitivities read off a linearized sensitivity curve:
/// 40 mAh of lithium per 10 mOhm and per 37 mAh of discharge capacity.
constexpr double kStatedSensR = 0.040 / 0.010;
constexpr double kStatedSensQd = 0.040 / 0.037;

std::string report_json(const InstrumentSpec& spec, const ResolutionReport& r);
/// Human-readable derivation, one quantity per line in mA, mV, mOhm, mAh.
std::string derivation_table(const InstrumentSpec& spec, const ResolutionReport& r);

}  // namespace fbench
