#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fbench/numeric.hpp"
#include "fbench/ocv.hpp"

namespace fbench {

/// Full-cell resistance split into a positive-electrode term that grows as
/// the positive electrode fills, plus an SOC-independent remainder.
struct ResistanceModel {
  double r0 = 0.0;  ///< ohms
  double k = 0.0;   ///< ohms
  double p = 1.0;   ///< exponent, > 0
  double r_other = 0.0;
  double f_pos = 0.0;
  double r_ref = 0.0;
  /// Measured positive-electrode resistance over y; replaces the parametric
  /// form when present.
  std::optional<MonotoneCubic> r_pos_table;

  double r_pos(double y) const;
  double r_full(double y) const { return r_pos(y) + r_other; }
  void validate() const;

  /// Same curve shape with the positive share of the reference resistance
  /// set to f: R_pos scales by f / f_pos and r_other = (1 - f) r_ref.
  ResistanceModel with_fpos(double f) const;

  /// Parametric model calibrated on the synthetic reference alignment:
  /// f_pos = 0.7, p = 4, R_full(5% SOC) = 0.140 ohm, R_full(90% SOC) = r_ref = 0.0236 ohm.
  static ResistanceModel default_model();

  /// Solves r0, k for a given exponent so R_full hits r_low at soc_low and
  /// r_ref at soc_high on the given alignment.
  static ResistanceModel calibrate(const ElectrodeAlignment& a, double f_pos, double r_ref, double p,
                                   double soc_low, double r_low, double soc_high);

  /// Tabulated mode: R_pos(y) from measured samples; r_ref is the minimum
  /// measured full-cell resistance.
  static ResistanceModel from_table(std::vector<double> y, std::vector<double> r_pos, double f_pos,
                                    double r_ref);
};

/// Full-cell resistance at a fractional SOC of the alignment's q_full.
double resistance_at_model_soc(const ElectrodeAlignment& a, const ResistanceModel& m, double soc);

/// Removes delta_q_lli Ah of cyclable lithium and re-solves the windows
/// against the voltage limits; electrode capacities stay fixed.
ElectrodeAlignment shift_lithium_inventory(const ElectrodeAlignment& a, double delta_q_lli,
                                           const CurvePair& curves, const VoltageLimits& limits = {});
/// Same as above but accepts negative shifts (lithium gain), used for
/// central differences around an operating point.
ElectrodeAlignment shift_lithium_signed(const ElectrodeAlignment& a, double delta_q_lli,
                                        const CurvePair& curves, const VoltageLimits& limits = {});

enum class LamPhase { lithiated, delithiated };

/// Loss of a fraction of one electrode's host capacity. Lithiated-phase
/// loss removes the lithium stored in the lost material at the window's
/// maximum-lithiation point; delithiated-phase loss removes it at the
/// minimum-lithiation point.
ElectrodeAlignment apply_lam(const ElectrodeAlignment& a, Electrode electrode, LamPhase phase,
                             double fraction, const CurvePair& curves, const VoltageLimits& limits = {});

std::vector<std::pair<double, double>> predicted_resistance_profile(const ElectrodeAlignment& a,
                                                                    const ResistanceModel& m,
                                                                    const std::vector<double>& q_grid);

struct SensitivityReport {
  std::vector<double> soc_setpoints;
  std::vector<double> dR_dQlli;  ///< ohm per Ah, one per setpoint
  double dQd_dQlli = 0.0;        ///< Ah per Ah (signed; q_d falls as lithium is lost)
  std::vector<double> qlli_grid;
  std::vector<std::vector<double>> r_table;  ///< [setpoint][grid index]
  std::vector<double> qd_by_grid;
};

/// Central differences of R at fixed SOC setpoints and of q_d with respect
/// to lithium loss, taken at the middle grid point.
SensitivityReport rls_sensitivity(const ElectrodeAlignment& a, const ResistanceModel& m,
                                  const std::vector<double>& soc_setpoints,
                                  const std::vector<double>& qlli_grid, const CurvePair& curves,
                                  const VoltageLimits& limits = {});

/// Grid {-1, 0, +1} mAh.
std::vector<double> default_qlli_grid();

struct FposRow {
  double f_pos = 0.0;
  double dR_dQlli = 0.0;     ///< ohm per Ah at 5% SOC
  double normalized = 0.0;   ///< |dR/dQlli| relative to f_pos = 1
};

std::vector<FposRow> fpos_sweep(const ElectrodeAlignment& a, const ResistanceModel& tmpl,
                                const std::vector<double>& f_grid, const CurvePair& curves,
                                double soc = 0.05, const VoltageLimits& limits = {});

struct ButlerVolmerParams {
  double k0 = 1.0;
  double c_e = 1.0;
  double c_s_max = 1.0;
  double alpha = 0.5;
  double temperature = 298.15;
  double faraday = 96485.33212;
  double gas_constant = 8.314462618;
  void validate() const;
};

/// Butler-Volmer reaction flux at surface concentration c_se and overpotential eta.
double bv_flux(const ButlerVolmerParams& p, double c_se, double eta);

}  // namespace fbench
