#include "fbench/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fbench/csv.hpp"
#include "fbench/errors.hpp"
#include "fbench/numeric.hpp"

namespace fbench {

FormationFeatures FormationFeatures::from(double q_c, double q_d) {
  if (!(q_d > 0.0)) throw FeatureError("formation: discharge capacity must be positive");
  if (!(q_c >= q_d)) throw FeatureError("formation: charge capacity below discharge capacity");
  FormationFeatures f;
  f.q_c = q_c;
  f.q_d = q_d;
  f.q_lli = q_c - q_d;
  f.ce_f = q_d / q_c;
  return f;
}

namespace {

bool is_charge(SegmentKind k) {
  return k == SegmentKind::cc_charge || k == SegmentKind::cv_charge || k == SegmentKind::pulse_charge;
}
bool is_discharge(SegmentKind k) { return k == SegmentKind::cc_discharge || k == SegmentKind::pulse_discharge; }

// Sum of per-step integrals over [b, e); steps are split wherever the
// (cycle, step) index changes so inter-step gaps are not integrated.
double stepwise_capacity(const std::vector<CyclerRecord>& r, std::size_t b, std::size_t e) {
  double total = 0.0;
  std::size_t s = b;
  for (std::size_t i = b + 1; i <= e; ++i) {
    if (i == e || r[i].step_index != r[s].step_index || r[i].cycle_index != r[s].cycle_index) {
      if (i - s >= 2) total += integrate_capacity(std::span<const CyclerRecord>(r).subspan(s, i - s));
      s = i;
    }
  }
  return total;
}

}  // namespace

FormationFeatures formation_features(const CyclerTimeSeries& series, const FormationConfig& cfg) {
  const auto segs = segment_steps(series, cfg.segments);
  const auto& r = series.records;

  std::size_t first_dis = segs.size();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (is_discharge(segs[k].kind)) {
      first_dis = k;
      break;
    }
  }
  std::size_t cb = r.size(), ce = 0;
  for (std::size_t k = 0; k < first_dis; ++k) {
    if (!is_charge(segs[k].kind)) continue;
    cb = std::min(cb, segs[k].begin);
    ce = std::max(ce, segs[k].end);
  }
  if (cb >= ce) throw FeatureError("formation: missing first charge step");
  const double q_c = stepwise_capacity(r, cb, ce);

  // The final discharge must be the last active step; earlier conditioning
  // discharges do not stand in for it.
  const StepSegment* last = nullptr;
  for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
    if (it->kind == SegmentKind::rest) continue;
    if (it->kind == SegmentKind::cc_discharge) last = &*it;
    break;
  }
  const double c10 = cfg.nominal_capacity / 10.0;
  if (!last || std::abs(std::abs(last->mean_current) - c10) > cfg.c10_tolerance * c10) {
    throw FeatureError("formation: missing final C/10 discharge step");
  }
  const double q_d = stepwise_capacity(r, last->begin, last->end);
  return FormationFeatures::from(q_c, q_d);
}

namespace {

MonotoneCubic q_of_v(const QVCurve& c, double v_lo, double v_hi) {
  if (c.q.size() != c.v.size() || c.q.size() < 2) throw InsufficientDataError("Q(V) curve needs >= 2 points");
  std::vector<std::size_t> idx(c.v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return c.v[a] < c.v[b]; });
  std::vector<double> v, q;
  for (std::size_t i : idx) {
    if (!v.empty() && c.v[i] == v.back()) continue;
    v.push_back(c.v[i]);
    q.push_back(c.q[i]);
  }
  // Round-off at the cut voltages is tolerated; the grid is clamped below.
  constexpr double kTol = 1e-9;
  if (v.size() < 2 || v.front() > v_lo + kTol || v.back() < v_hi - kTol) {
    throw SpanError("Q(V) curve does not span the voltage grid");
  }
  return MonotoneCubic(std::move(v), std::move(q));
}

}  // namespace

double var_delta_q(const QVCurve& early, const QVCurve& late, double v_lo, double v_hi, std::size_t n) {
  if (!(v_hi > v_lo) || n < 2) throw ConfigError("var_delta_q: bad voltage grid");
  const auto e = q_of_v(early, v_lo, v_hi);
  const auto l = q_of_v(late, v_lo, v_hi);
  const auto grid = linspace(v_lo, v_hi, n);
  std::vector<double> dq(n);
  auto at = [](const MonotoneCubic& f, double x) {
    return f(std::clamp(x, f.knots().front(), f.knots().back()));
  };
  for (std::size_t i = 0; i < n; ++i) dq[i] = at(l, grid[i]) - at(e, grid[i]);
  return variance_population(dq);
}

CycleLife cycle_life(const std::vector<double>& cycle, const std::vector<double>& capacity,
                     double initial_capacity, double retention) {
  if (capacity.empty() || cycle.size() != capacity.size()) {
    throw InsufficientDataError("cycle_life: need matching non-empty cycle and capacity series");
  }
  if (!(initial_capacity > 0.0)) throw DomainError("cycle_life: initial capacity must be positive");
  const double thr = retention * initial_capacity;
  for (std::size_t i = 0; i < capacity.size(); ++i) {
    if (capacity[i] <= thr) {
      if (i == 0) return {cycle[0], false};
      const double f = (capacity[i - 1] - thr) / (capacity[i - 1] - capacity[i]);
      return {cycle[i - 1] + f * (cycle[i] - cycle[i - 1]), false};
    }
  }
  return {cycle.back(), true};
}

double initial_capacity(const std::vector<double>& capacity, const std::vector<bool>& is_rpt) {
  double best = -1.0;
  int taken = 0;
  for (std::size_t i = 0; i < capacity.size() && taken < 5; ++i) {
    if (i < is_rpt.size() && is_rpt[i]) continue;
    best = std::max(best, capacity[i]);
    ++taken;
  }
  if (taken == 0) throw EmptyInputError("initial_capacity: no regular cycles");
  return best;
}

namespace {

const int kRetentions[] = {50, 60, 70, 80};
const char* const kStringColumns[] = {"cell_id", "group", "temperature_label"};

}  // namespace

void write_feature_table(const std::string& path, const std::vector<FeatureRecord>& features,
                         const std::vector<LifeOutcome>& outcomes) {
  if (features.size() != outcomes.size()) throw ConfigError("feature table: features/outcomes length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "cell_id,group,temperature_label,q_c_ah,q_d_ah,q_lli_ah,ce_f,r_ls_ohm,r_90_ohm,var_dq_ah2";
  for (int r : kRetentions) out << ",cycles_to_" << r;
  for (int r : kRetentions) out << ",censored_" << r;
  out << '\n';
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    const auto& o = outcomes[i];
    if (f.cell_id != o.cell_id) throw ConsistencyError("feature table: cell order mismatch for " + f.cell_id);
    out << f.cell_id << ',' << f.group << ',' << f.temperature_label << ',' << csv::fmt(f.formation.q_c) << ','
        << csv::fmt(f.formation.q_d) << ',' << csv::fmt(f.formation.q_lli) << ',' << csv::fmt(f.formation.ce_f)
        << ',' << csv::fmt(f.r_ls) << ',' << csv::fmt(f.r_90) << ',' << csv::fmt(f.var_dq);
    for (int r : kRetentions) {
      auto it = o.cycles_to_retention.find(r);
      if (it == o.cycles_to_retention.end()) throw ConsistencyError("feature table: missing retention outcome");
      out << ',' << csv::fmt(it->second.cycles);
    }
    for (int r : kRetentions) out << ',' << (o.cycles_to_retention.at(r).censored ? 1 : 0);
    out << '\n';
  }
}

std::vector<double> FeatureTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("feature table has no column '" + name + "'");
  const auto j = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row[j]);
  return out;
}

FeatureTable read_feature_table(const std::string& path) {
  const auto t = csv::read_file(path);
  FeatureTable ft;
  const std::size_t c_id = t.column("cell_id");
  std::size_t c_group = t.header.size(), c_temp = t.header.size();
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == "group") c_group = i;
    if (t.header[i] == "temperature_label") c_temp = i;
  }
  std::vector<std::size_t> numeric;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (std::find(std::begin(kStringColumns), std::end(kStringColumns), t.header[i]) != std::end(kStringColumns)) {
      continue;
    }
    numeric.push_back(i);
    ft.columns.push_back(t.header[i]);
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size()) throw SchemaError("feature table row " + std::to_string(r + 2) + " is short");
    ft.cell_ids.push_back(row[c_id]);
    ft.groups.push_back(c_group < row.size() ? row[c_group] : "");
    ft.temperature_labels.push_back(c_temp < row.size() ? row[c_temp] : "room");
    std::vector<double> vals;
    for (std::size_t j : numeric) vals.push_back(csv::to_double(row[j], "feature table line " + std::to_string(r + 2)));
    ft.values.push_back(std::move(vals));
  }
  if (ft.values.empty()) throw EmptyInputError("feature table has no rows");
  return ft;
}

}  // namespace fbench

namespace fbench {

void write_capacity_csv(const std::string& path, const CapacitySeries& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "cycle_index,discharge_capacity_ah,is_rpt\n";
  for (std::size_t i = 0; i < s.cycle.size(); ++i) {
    out << csv::fmt(s.cycle[i]) << ',' << csv::fmt(s.capacity[i]) << ',' << (s.is_rpt[i] ? 1 : 0) << '\n';
  }
}

CapacitySeries read_capacity_csv(const std::string& path) {
  const auto t = csv::read_file(path);
  const auto c_n = t.column("cycle_index"), c_q = t.column("discharge_capacity_ah"), c_r = t.column("is_rpt");
  CapacitySeries s;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw SchemaError("short row in " + path);
    s.cycle.push_back(csv::to_double(row[c_n], path));
    s.capacity.push_back(csv::to_double(row[c_q], path));
    s.is_rpt.push_back(csv::to_int(row[c_r], path) != 0);
  }
  return s;
}

void write_qv_csv(const std::string& path, const QVCurve& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "q_ah,voltage_v\n";
  for (std::size_t i = 0; i < c.q.size(); ++i) out << csv::fmt(c.q[i]) << ',' << csv::fmt(c.v[i]) << '\n';
}

QVCurve read_qv_csv(const std::string& path) {
  const auto t = csv::read_file(path);
  const auto c_q = t.column("q_ah"), c_v = t.column("voltage_v");
  QVCurve c;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw SchemaError("short row in " + path);
    c.q.push_back(csv::to_double(row[c_q], path));
    c.v.push_back(csv::to_double(row[c_v], path));
  }
  return c;
}

}  // namespace fbench
