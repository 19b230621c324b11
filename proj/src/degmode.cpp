#include "fbench/degmode.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "fbench/csv.hpp"

namespace fbench {

DegradationState degradation_metrics(const ElectrodeAlignment& fresh, const ElectrodeAlignment& aged) {
  if (fresh.curves_id != aged.curves_id) {
    throw ConsistencyError("alignments reference different half-cell curves ('" + fresh.curves_id + "' vs '" +
                           aged.curves_id + "')");
  }
  fresh.validate(1e-6);
  aged.validate(1e-6);
  DegradationState s;
  s.q_li = aged.q_li();
  s.lli = 1.0 - s.q_li / fresh.q_li();
  s.lam_pe = 1.0 - aged.c_pe / fresh.c_pe;
  s.lam_ne = 1.0 - aged.c_ne / fresh.c_ne;
  for (double m : {s.lli, s.lam_pe, s.lam_ne}) {
    if (m < 0.0 || m > 1.0) s.flagged = true;
  }
  return s;
}

std::vector<DegradationState> degradation_trajectory(const std::vector<RptCurve>& rpts, const CurvePair& curves,
                                                     const FitConfig& fit) {
  if (rpts.size() < 2) throw InsufficientDataError("degradation trajectory needs at least 2 reference tests");
  std::vector<DegradationState> out;
  FitConfig cfg = fit;
  const FitResult ref = fit_electrode_alignment(orient_from_empty(rpts[0].curve), curves, cfg);
  DegradationState first;
  first.q_li = ref.alignment.q_li();
  first.fit_rmse = ref.rmse;
  first.cycle_number = rpts[0].cycle_number;
  out.push_back(first);
  cfg.seed_alignment = ref.alignment;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < rpts.size(); ++i) {
    DegradationState s;
    try {
      const FitResult r = fit_electrode_alignment(orient_from_empty(rpts[i].curve), curves, cfg);
      s = degradation_metrics(ref.alignment, r.alignment);
      s.fit_rmse = r.rmse;
      cfg.seed_alignment = r.alignment;
    } catch (const Error&) {
      s.gap = true;
      s.lli = s.lam_pe = s.lam_ne = s.q_li = s.fit_rmse = nan;
    }
    s.rpt_index = static_cast<int>(i);
    s.cycle_number = rpts[i].cycle_number;
    out.push_back(s);
  }
  return out;
}

void write_trajectory_csv(const std::string& path, const std::vector<DegradationState>& states) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "rpt_index,cycle_number,lli,lam_pe,lam_ne,q_li_ah,fit_rmse_v,status\n";
  for (const auto& s : states) {
    out << s.rpt_index << ',' << s.cycle_number << ',';
    if (s.gap) {
      out << ",,,,,gap\n";
      continue;
    }
    out << csv::fmt(s.lli) << ',' << csv::fmt(s.lam_pe) << ',' << csv::fmt(s.lam_ne) << ',' << csv::fmt(s.q_li) << ','
        << csv::fmt(s.fit_rmse) << ',' << (s.flagged ? "flagged" : "ok") << '\n';
  }
}

}  // namespace fbench
