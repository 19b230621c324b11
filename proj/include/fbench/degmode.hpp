#pragma once

#include <string>
#include <vector>

#include "fbench/ocv.hpp"

namespace fbench {

/// Degradation modes relative to a fresh reference. Lithium inventory is
/// counted at full charge: q_li = c_pe * y_100 + c_ne * x_100.
struct DegradationState {
  int rpt_index = 0;
  int cycle_number = 0;
  double lli = 0.0;     ///< fraction of fresh lithium inventory lost
  double lam_pe = 0.0;  ///< fraction of fresh c_pe lost
  double lam_ne = 0.0;  ///< fraction of fresh c_ne lost
  double q_li = 0.0;    ///< Ah
  double fit_rmse = 0.0;  ///< V
  bool gap = false;       ///< the fit for this test failed; values are NaN
  bool flagged = false;   ///< a mode fell outside [-0.05, 1] or below zero
};

/// Throws ConsistencyError when the alignments were fitted against
/// different half-cell curves.
DegradationState degradation_metrics(const ElectrodeAlignment& fresh, const ElectrodeAlignment& aged);

struct RptCurve {
  int cycle_number = 0;
  QVCurve curve;  ///< C/20 curve, charge or discharge orientation
};

/// Fits every curve in order; the first is the fresh reference and each
/// fit also starts from the previous successful solution. A failed fit
/// leaves a gap entry. Throws when the reference itself cannot be fitted.
std::vector<DegradationState> degradation_trajectory(const std::vector<RptCurve>& rpts, const CurvePair& curves,
                                                     const FitConfig& fit = {});

/// Columns: rpt_index, cycle_number, lli, lam_pe, lam_ne, q_li_ah,
/// fit_rmse_v, status. Gap rows leave the numeric fields empty.
void write_trajectory_csv(const std::string& path, const std::vector<DegradationState>& states);

}  // namespace fbench
