#include "fbench/stoichsim.hpp"

#include <algorithm>
#include <cmath>

#include "fbench/errors.hpp"

namespace fbench {

double ResistanceModel::r_pos(double y) const {
  if (r_pos_table) {
    bool clamped = false;
    return r_pos_table->clamp_eval(y, clamped);
  }
  if (k == 0.0) return r0;
  if (!(y < 1.0)) throw DomainError("resistance model: y must be below 1");
  return r0 + k * std::pow(1.0 - y, -p);
}

void ResistanceModel::validate() const {
  if (!(f_pos >= 0.0 && f_pos <= 1.0)) throw ConfigError("resistance model: f_pos must lie in [0, 1]");
  if (!(r_ref >= 0.0)) throw ConfigError("resistance model: r_ref must be non-negative");
  if (std::abs(r_other - (1.0 - f_pos) * r_ref) > 1e-12 * std::max(1.0, r_ref)) {
    throw ConfigError("resistance model: r_other must equal (1 - f_pos) * r_ref");
  }
  if (!r_pos_table) {
    if (!(p > 0.0)) throw ConfigError("resistance model: exponent p must be positive");
    if (k < 0.0 || (f_pos > 0.0 && k == 0.0)) {
      throw ConfigError("resistance model: k must be positive so R_pos increases with lithiation");
    }
  }
}

ResistanceModel ResistanceModel::with_fpos(double f) const {
  if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("f_pos must lie in [0, 1]");
  if (f_pos == 0.0 && f != 0.0) throw ConfigError("cannot rescale a model with zero positive share");
  ResistanceModel m = *this;
  const double scale = f_pos == 0.0 ? 0.0 : f / f_pos;
  m.r0 *= scale;
  m.k *= scale;
  if (m.r_pos_table) {
    auto vals = m.r_pos_table->values();
    for (auto& v : vals) v *= scale;
    // A zero share leaves a flat table, which the interpolant accepts.
    m.r_pos_table = MonotoneCubic(m.r_pos_table->knots(), vals);
  }
  m.f_pos = f;
  m.r_other = (1.0 - f) * r_ref;
  return m;
}

ResistanceModel ResistanceModel::calibrate(const ElectrodeAlignment& a, double f_pos, double r_ref,
                                           double p, double soc_low, double r_low, double soc_high) {
  const double y_l = a.y_at(soc_low * a.q_full);
  const double y_h = a.y_at(soc_high * a.q_full);
  ResistanceModel m;
  m.p = p;
  m.f_pos = f_pos;
  m.r_ref = r_ref;
  m.r_other = (1.0 - f_pos) * r_ref;
  m.k = (r_low - r_ref) / (std::pow(1.0 - y_l, -p) - std::pow(1.0 - y_h, -p));
  m.r0 = f_pos * r_ref - m.k * std::pow(1.0 - y_h, -p);
  m.validate();
  return m;
}

ResistanceModel ResistanceModel::default_model() {
  static const ResistanceModel m = calibrate(default_alignment(), 0.7, 0.0236, 4.0, 0.05, 0.140, 0.90);
  return m;
}

ResistanceModel ResistanceModel::from_table(std::vector<double> y, std::vector<double> r_pos, double f_pos,
                                            double r_ref) {
  ResistanceModel m;
  m.f_pos = f_pos;
  m.r_ref = r_ref;
  m.r_other = (1.0 - f_pos) * r_ref;
  m.r_pos_table = MonotoneCubic(std::move(y), std::move(r_pos));
  m.validate();
  return m;
}

double resistance_at_model_soc(const ElectrodeAlignment& a, const ResistanceModel& m, double soc) {
  if (!(soc >= 0.0 && soc <= 1.0)) throw DomainError("SOC must lie in [0, 1]");
  return m.r_full(a.y_at(soc * a.q_full));
}

ElectrodeAlignment shift_lithium_signed(const ElectrodeAlignment& a, double delta_q_lli,
                                        const CurvePair& curves, const VoltageLimits& limits) {
  if (delta_q_lli == 0.0) return a;
  return solve_windows(a.c_pe, a.c_ne, a.q_li() - delta_q_lli, curves, limits);
}

ElectrodeAlignment shift_lithium_inventory(const ElectrodeAlignment& a, double delta_q_lli,
                                           const CurvePair& curves, const VoltageLimits& limits) {
  if (!(delta_q_lli >= 0.0)) throw DomainError("lithium inventory shift must be non-negative");
  return shift_lithium_signed(a, delta_q_lli, curves, limits);
}

ElectrodeAlignment apply_lam(const ElectrodeAlignment& a, Electrode electrode, LamPhase phase,
                             double fraction, const CurvePair& curves, const VoltageLimits& limits) {
  if (!(fraction >= 0.0 && fraction <= 0.5)) throw DomainError("LAM fraction must lie in [0, 0.5]");
  if (fraction == 0.0) return a;
  double c_pe = a.c_pe, c_ne = a.c_ne, q_li = a.q_li();
  if (electrode == Electrode::positive) {
    const double s = phase == LamPhase::lithiated ? a.y_0 : a.y_100;
    q_li -= fraction * a.c_pe * s;
    c_pe *= 1.0 - fraction;
  } else {
    const double s = phase == LamPhase::lithiated ? a.x_100 : a.x_0;
    q_li -= fraction * a.c_ne * s;
    c_ne *= 1.0 - fraction;
  }
  return solve_windows(c_pe, c_ne, q_li, curves, limits);
}

std::vector<std::pair<double, double>> predicted_resistance_profile(const ElectrodeAlignment& a,
                                                                    const ResistanceModel& m,
                                                                    const std::vector<double>& q_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(q_grid.size());
  const double eps = 1e-12 * std::max(1.0, a.q_full);
  for (double q : q_grid) {
    if (q < -eps || q > a.q_full + eps) throw DomainError("resistance profile: q outside [0, q_full]");
    out.emplace_back(q, m.r_full(a.y_at(q)));
  }
  return out;
}

std::vector<double> default_qlli_grid() { return {-0.001, 0.0, 0.001}; }

SensitivityReport rls_sensitivity(const ElectrodeAlignment& a, const ResistanceModel& m,
                                  const std::vector<double>& soc_setpoints,
                                  const std::vector<double>& qlli_grid, const CurvePair& curves,
                                  const VoltageLimits& limits) {
  if (qlli_grid.size() < 3) throw ConfigError("sensitivity grid needs at least 3 points");
  for (double s : soc_setpoints) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("sensitivity setpoints must lie in [0, 1]");
  }
  SensitivityReport rep;
  rep.soc_setpoints = soc_setpoints;
  rep.qlli_grid = qlli_grid;
  rep.r_table.assign(soc_setpoints.size(), std::vector<double>(qlli_grid.size()));
  for (std::size_t g = 0; g < qlli_grid.size(); ++g) {
    const auto shifted = shift_lithium_signed(a, qlli_grid[g], curves, limits);
    rep.qd_by_grid.push_back(shifted.q_full);
    for (std::size_t s = 0; s < soc_setpoints.size(); ++s) {
      rep.r_table[s][g] = resistance_at_model_soc(shifted, m, soc_setpoints[s]);
    }
  }
  const std::size_t mid = qlli_grid.size() / 2;
  const double h = qlli_grid[mid + 1] - qlli_grid[mid - 1];
  auto diff = [&](double lo, double hi) { return h == 0.0 ? 0.0 : (hi - lo) / h; };
  for (std::size_t s = 0; s < soc_setpoints.size(); ++s) {
    rep.dR_dQlli.push_back(diff(rep.r_table[s][mid - 1], rep.r_table[s][mid + 1]));
  }
  rep.dQd_dQlli = diff(rep.qd_by_grid[mid - 1], rep.qd_by_grid[mid + 1]);
  return rep;
}

std::vector<FposRow> fpos_sweep(const ElectrodeAlignment& a, const ResistanceModel& tmpl,
                                const std::vector<double>& f_grid, const CurvePair& curves, double soc,
                                const VoltageLimits& limits) {
  const auto grid = default_qlli_grid();
  auto sens = [&](double f) {
    return rls_sensitivity(a, tmpl.with_fpos(f), {soc}, grid, curves, limits).dR_dQlli.front();
  };
  const double ref = std::abs(sens(1.0));
  std::vector<FposRow> rows;
  for (double f : f_grid) {
    FposRow r;
    r.f_pos = f;
    r.dR_dQlli = sens(f);
    r.normalized = ref == 0.0 ? 0.0 : std::abs(r.dR_dQlli) / ref;
    rows.push_back(r);
  }
  return rows;
}

void ButlerVolmerParams::validate() const {
  if (!(k0 > 0.0 && c_e > 0.0 && c_s_max > 0.0 && temperature > 0.0 && faraday > 0.0 && gas_constant > 0.0)) {
    throw ConfigError("Butler-Volmer parameters must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("transfer coefficient must lie in (0, 1)");
}

double bv_flux(const ButlerVolmerParams& p, double c_se, double eta) {
  p.validate();
  if (!(c_se > 0.0 && c_se < p.c_s_max)) {
    throw DomainError("surface concentration at or beyond a boundary: exchange term vanishes");
  }
  const double f = p.faraday / (p.gas_constant * p.temperature);
  const double exchange = p.k0 * std::pow(p.c_e, 1.0 - p.alpha) * std::pow(p.c_s_max - c_se, 1.0 - p.alpha) *
                          std::pow(c_se, p.alpha);
  return exchange * (std::exp((1.0 - p.alpha) * f * eta) - std::exp(-p.alpha * f * eta));
}

}  // namespace fbench
