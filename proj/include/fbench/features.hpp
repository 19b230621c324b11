#pragma once

#include <map>
#include <string>
#include <vector>

#include "fbench/ingest.hpp"
#include "fbench/ocv.hpp"

namespace fbench {

struct FormationFeatures {
  double q_c = 0.0;    ///< Ah
  double q_d = 0.0;    ///< Ah
  double q_lli = 0.0;  ///< Ah
  double ce_f = 0.0;

  /// Derives q_lli and ce_f; throws FeatureError when q_c >= q_d > 0 fails.
  static FormationFeatures from(double q_c, double q_d);
};

struct FormationConfig {
  SegmentConfig segments;
  double nominal_capacity = 2.37;  ///< Ah, sets the C/10 current
  double c10_tolerance = 0.25;     ///< relative band on the final discharge current
};

FormationFeatures formation_features(const CyclerTimeSeries& series, const FormationConfig& cfg = {});

/// Population variance of Q_late(V) - Q_early(V) on a uniform voltage grid.
/// Curves are (q, v) samples of a discharge; v need not be sorted.
double var_delta_q(const QVCurve& early, const QVCurve& late, double v_lo = 3.0, double v_hi = 4.2,
                   std::size_t n = 1000);

/// Discharge capacity per cycle; RPT cycles are flagged and kept apart
/// from the end-of-life series.
struct CapacitySeries {
  std::vector<double> cycle;
  std::vector<double> capacity;  ///< Ah
  std::vector<bool> is_rpt;
};

void write_capacity_csv(const std::string& path, const CapacitySeries& s);
CapacitySeries read_capacity_csv(const std::string& path);
void write_qv_csv(const std::string& path, const QVCurve& c);
QVCurve read_qv_csv(const std::string& path);

struct CycleLife {
  double cycles = 0.0;
  bool censored = false;
};

/// First down-crossing of retention * initial_capacity, linearly
/// interpolated between bracketing cycles.
CycleLife cycle_life(const std::vector<double>& cycle, const std::vector<double>& capacity,
                     double initial_capacity, double retention);

/// Maximum discharge capacity over the first five non-RPT cycles.
double initial_capacity(const std::vector<double>& capacity, const std::vector<bool>& is_rpt);

struct FeatureRecord {
  std::string cell_id;
  std::string group;
  std::string temperature_label = "room";
  FormationFeatures formation;
  double r_ls = 0.0;    ///< ohm
  double r_90 = 0.0;    ///< ohm
  double var_dq = 0.0;  ///< Ah^2
};

struct LifeOutcome {
  std::string cell_id;
  std::map<int, CycleLife> cycles_to_retention;  ///< key: retention percent
};

/// Feature table: one row per cell, features then cycles_to_{50,60,70,80}.
void write_feature_table(const std::string& path, const std::vector<FeatureRecord>& features,
                         const std::vector<LifeOutcome>& outcomes);

struct FeatureTable {
  std::vector<std::string> cell_ids;
  std::vector<std::string> groups;
  std::vector<std::string> temperature_labels;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  ///< [cell][column]
  std::vector<double> column(const std::string& name) const;
};

FeatureTable read_feature_table(const std::string& path);

}  // namespace fbench
