#include "fbench/ocv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "fbench/csv.hpp"
#include "fbench/optimize.hpp"

namespace fbench {

HalfCellCurve::HalfCellCurve(Electrode electrode, std::vector<double> stoichiometry,
                             std::vector<double> potential)
    : electrode_(electrode) {
  if (stoichiometry.size() < 20) throw ConfigError("half-cell curve needs at least 20 points");
  if (stoichiometry.front() > 0.005 || stoichiometry.back() < 0.995) {
    throw ConfigError("half-cell curve must cover stoichiometry [0.005, 0.995]");
  }
  for (std::size_t i = 1; i < potential.size(); ++i) {
    if (!(potential[i] < potential[i - 1])) {
      throw ConfigError("half-cell potential must decrease strictly with lithiation");
    }
  }
  interp_ = MonotoneCubic(std::move(stoichiometry), std::move(potential));
}

// Graphite-like: steep rise toward empty, staged plateaus, drop near full.
double synthetic_u_neg(double x) {
  return 0.063 + 0.8 * std::exp(-75.0 * (x + 0.001)) - 0.0120 * std::tanh((x - 0.127) / 0.016) -
         0.0118 * std::tanh((x - 0.155) / 0.016) - 0.0035 * std::tanh((x - 0.220) / 0.020) -
         0.0095 * std::tanh((x - 0.190) / 0.013) - 0.0145 * std::tanh((x - 0.490) / 0.020) -
         0.0800 * std::tanh((x - 1.030) / 0.055);
}

// Layered-oxide-like: gentle slope with a sharp fall as y approaches 1.
// The offset puts U_pos(0.03) - U_neg(0.85) at exactly 4.2 V.
double synthetic_u_pos(double y) {
  return 4.294358475640035 - 1.05 * y + 0.30 * y * y - 0.42 * std::exp(30.0 * (y - 1.0)) +
         0.06 * std::exp(-y / 0.04);
}

const CurvePair& default_curves() {
  static const CurvePair pair = [] {
    const auto grid = linspace(0.0, 1.0, 501);
    std::vector<double> up(grid.size()), un(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      up[i] = synthetic_u_pos(grid[i]);
      un[i] = synthetic_u_neg(grid[i]);
    }
    return CurvePair{HalfCellCurve(Electrode::positive, grid, up),
                     HalfCellCurve(Electrode::negative, grid, un), "synthetic-v1"};
  }();
  return pair;
}

HalfCellCurve load_half_cell_csv(const std::string& path, Electrode electrode) {
  const auto t = csv::read_file(path);
  const auto cs = t.column("stoichiometry");
  const auto cv = t.column("potential_v");
  std::vector<double> s, v;
  for (const auto& row : t.rows) {
    if (row.size() <= std::max(cs, cv)) throw SchemaError("short row in " + path);
    s.push_back(csv::to_double(row[cs], "stoichiometry"));
    v.push_back(csv::to_double(row[cv], "potential_v"));
  }
  return HalfCellCurve(electrode, std::move(s), std::move(v));
}

void write_half_cell_csv(const std::string& path, const HalfCellCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "stoichiometry,potential_v\n";
  for (std::size_t i = 0; i < curve.stoichiometry().size(); ++i) {
    out << csv::fmt(curve.stoichiometry()[i]) << ',' << csv::fmt(curve.potential()[i]) << '\n';
  }
}

void ElectrodeAlignment::validate(double tol) const {
  if (!(c_pe > 0.0 && c_ne > 0.0)) throw DomainError("alignment: electrode capacities must be positive");
  if (!(0.0 <= y_100 && y_100 < y_0 && y_0 <= 1.0)) throw DomainError("alignment: bad positive window");
  if (!(0.0 <= x_0 && x_0 < x_100 && x_100 <= 1.0)) throw DomainError("alignment: bad negative window");
  if (std::abs(c_pe * (y_0 - y_100) - q_full) > tol || std::abs(c_ne * (x_100 - x_0) - q_full) > tol) {
    throw DomainError("alignment: window capacities disagree with q_full");
  }
}

ElectrodeAlignment solve_windows(double c_pe, double c_ne, double q_li, const CurvePair& curves,
                                 const VoltageLimits& limits) {
  if (!(c_pe > 0.0 && c_ne > 0.0 && q_li > 0.0)) throw DomainError("solve_windows: non-positive input");
  const double x_lo = std::max(0.0, (q_li - c_pe) / c_ne);
  const double x_hi = std::min(1.0, q_li / c_ne);
  if (!(x_hi > x_lo)) throw DomainError("solve_windows: no lithium distribution fits both electrodes");
  auto v = [&](double x) { return curves.positive.at((q_li - c_ne * x) / c_pe) - curves.negative.at(x); };
  if (v(x_lo) > limits.v_min || v(x_hi) < limits.v_max) {
    throw DomainError("solve_windows: voltage limits unreachable inside [0,1] windows");
  }
  ElectrodeAlignment a;
  a.c_pe = c_pe;
  a.c_ne = c_ne;
  a.x_0 = bisect([&](double x) { return v(x) - limits.v_min; }, x_lo, x_hi, 1e-15);
  a.x_100 = bisect([&](double x) { return v(x) - limits.v_max; }, x_lo, x_hi, 1e-15);
  a.y_0 = (q_li - c_ne * a.x_0) / c_pe;
  a.y_100 = (q_li - c_ne * a.x_100) / c_pe;
  a.q_full = c_ne * (a.x_100 - a.x_0);
  a.curves_id = curves.id;
  return a;
}

ElectrodeAlignment default_alignment() {
  static const ElectrodeAlignment a = solve_windows(3.3, 2.9, 3.3 * 0.03 + 2.9 * 0.85, default_curves());
  return a;
}

double full_cell_voltage(const ElectrodeAlignment& a, const CurvePair& curves, double q, bool* clamped) {
  const double eps = 1e-12 * std::max(1.0, a.q_full);
  if (q < -eps || q > a.q_full + eps) throw DomainError("full_cell_voltage: q outside [0, q_full]");
  bool cp = false, cn = false;
  const double v = curves.positive.at(a.y_at(q), cp) - curves.negative.at(a.x_at(q), cn);
  if (clamped) *clamped = cp || cn;
  return v;
}

ElectrodeState electrode_window_at_voltage(const ElectrodeAlignment& a, const CurvePair& curves,
                                           double v_target) {
  const double v0 = full_cell_voltage(a, curves, 0.0);
  const double v1 = full_cell_voltage(a, curves, a.q_full);
  const double tol = 1e-6;
  double q = 0.0;
  if (std::abs(v_target - v0) <= tol) {
    q = 0.0;
  } else if (std::abs(v_target - v1) <= tol) {
    q = a.q_full;
  } else if (v_target < v0 || v_target > v1) {
    throw DomainError("electrode_window_at_voltage: target outside the cell's voltage span");
  } else {
    q = bisect([&](double qq) { return full_cell_voltage(a, curves, qq) - v_target; }, 0.0, a.q_full, 1e-14);
  }
  ElectrodeState s;
  s.q = q;
  s.y = a.y_at(q);
  s.x = a.x_at(q);
  s.u_pos = curves.positive.at(s.y);
  return s;
}

QVCurve synthesize_curve(const ElectrodeAlignment& a, const CurvePair& curves, std::size_t n) {
  QVCurve c;
  c.q = linspace(0.0, a.q_full, n);
  c.v.reserve(n);
  for (double q : c.q) c.v.push_back(full_cell_voltage(a, curves, q));
  return c;
}

QVCurve orient_from_empty(const QVCurve& c) {
  if (c.q.size() != c.v.size()) throw ConfigError("curve: q/V length mismatch");
  if (c.q.size() < 2 || c.v.front() <= c.v.back()) return c;
  const double q_max = *std::max_element(c.q.begin(), c.q.end());
  QVCurve out;
  for (std::size_t i = c.q.size(); i-- > 0;) {
    out.q.push_back(q_max - c.q[i]);
    out.v.push_back(c.v[i]);
  }
  return out;
}

QVCurve resample_measured(const QVCurve& measured, std::size_t n) {
  if (measured.q.size() != measured.v.size()) throw ConfigError("measured curve: q/V length mismatch");
  std::vector<double> q, v;
  for (std::size_t i = 0; i < measured.q.size(); ++i) {
    if (!q.empty() && measured.q[i] == q.back()) continue;
    if (!q.empty() && measured.q[i] < q.back()) {
      throw ValidationError("measured curve is not monotone in capacity");
    }
    q.push_back(measured.q[i]);
    v.push_back(measured.v[i]);
  }
  if (q.size() < 50) throw InsufficientDataError("measured curve needs at least 50 distinct points");
  const double q0 = q.front();
  for (auto& x : q) x -= q0;
  MonotoneCubic interp(q, v);
  QVCurve out;
  out.q = linspace(0.0, q.back(), n);
  out.v.reserve(n);
  for (double x : out.q) out.v.push_back(interp(x));
  return out;
}

ElectrodeAlignment alignment_from_top(double c_pe, double c_ne, double x_100, double y_100,
                                      double q_full, const std::string& curves_id) {
  ElectrodeAlignment a;
  a.c_pe = c_pe;
  a.c_ne = c_ne;
  a.x_100 = x_100;
  a.y_100 = y_100;
  a.q_full = q_full;
  a.y_0 = y_100 + q_full / c_pe;
  a.x_0 = x_100 - q_full / c_ne;
  a.curves_id = curves_id;
  return a;
}

double alignment_objective(const QVCurve& grid, const CurvePair& curves, double c_pe, double c_ne,
                           double x_100, double y_100) {
  const double q_full = grid.q.back();
  const double y_0 = y_100 + q_full / c_pe;
  const double x_0 = x_100 - q_full / c_ne;
  const double excess = std::max(0.0, y_0 - 1.0) + std::max(0.0, -x_0);
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.q.size(); ++i) {
    const double q = grid.q[i];
    const double model = curves.positive.at(y_0 - q / c_pe) - curves.negative.at(x_0 + q / c_ne);
    const double r = model - grid.v[i];
    acc += r * r;
  }
  return acc / static_cast<double>(grid.q.size()) + excess + excess * excess;
}

FitResult fit_electrode_alignment(const QVCurve& measured, const CurvePair& curves, const FitConfig& cfg) {
  if (!cfg.fix_y100) throw ConfigError("fit: only the fixed-y_100 formulation is supported");
  if (!(cfg.c_lo > 0.0 && cfg.c_hi > cfg.c_lo)) throw ConfigError("fit: capacity bounds must satisfy 0 < lo < hi");
  if (!(cfg.x100_lo > 0.0 && cfg.x100_hi > cfg.x100_lo && cfg.x100_hi <= 1.0)) {
    throw ConfigError("fit: x_100 bounds must satisfy 0 < lo < hi <= 1");
  }
  if (!(cfg.y100 >= 0.0 && cfg.y100 < 1.0)) throw ConfigError("fit: y_100 must lie in [0, 1)");
  // y_0 <= 1 needs c_pe >= q_full/(1 - y_100); x_0 >= 0 needs c_ne * x_100 >= q_full.
  if (cfg.c_hi * (1.0 - cfg.y100) < 1.0 || cfg.c_hi * cfg.x100_hi < 1.0) {
    throw ConfigError("fit: bounds admit no feasible stoichiometry window");
  }
  if (cfg.starts < 1 || cfg.max_iter < 1) throw ConfigError("fit: need at least one start and iteration");

  const QVCurve grid = resample_measured(measured, cfg.grid_points);
  const double q_full = grid.q.back();
  if (!(q_full > 0.0)) throw InsufficientDataError("measured curve has zero capacity span");

  auto decode = [&](const std::vector<double>& u) {
    return std::array<double, 3>{q_full * (cfg.c_lo + u[0] * (cfg.c_hi - cfg.c_lo)),
                                 q_full * (cfg.c_lo + u[1] * (cfg.c_hi - cfg.c_lo)),
                                 cfg.x100_lo + u[2] * (cfg.x100_hi - cfg.x100_lo)};
  };
  auto objective = [&](const std::vector<double>& u) {
    const auto p = decode(u);
    return alignment_objective(grid, curves, p[0], p[1], p[2], cfg.y100);
  };

  std::mt19937_64 rng(cfg.seed);
  auto starts = latin_hypercube(static_cast<std::size_t>(cfg.starts), 3, rng);
  if (cfg.seed_alignment) {
    const auto& s = *cfg.seed_alignment;
    starts.insert(starts.begin(), {std::clamp((s.c_pe / q_full - cfg.c_lo) / (cfg.c_hi - cfg.c_lo), 0.0, 1.0),
                                   std::clamp((s.c_ne / q_full - cfg.c_lo) / (cfg.c_hi - cfg.c_lo), 0.0, 1.0),
                                   std::clamp((s.x_100 - cfg.x100_lo) / (cfg.x100_hi - cfg.x100_lo), 0.0, 1.0)});
  }

  SimplexResult best;
  best.f = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  int total_iter = 0;
  for (const auto& x0 : starts) {
    SimplexConfig sc;
    sc.max_iter = cfg.max_iter;
    sc.f_tol = cfg.f_tol;
    auto r = nelder_mead_unit_box(objective, x0, sc);
    // A second, small simplex from the first optimum guards against a
    // collapsed simplex stalling in a curved valley.
    sc.max_iter = std::max(1, cfg.max_iter - r.iterations);
    sc.initial_step = 0.01;
    auto polished = nelder_mead_unit_box(objective, r.x, sc);
    const bool ok = r.converged || polished.converged;
    SimplexResult run = polished.f <= r.f ? polished : r;
    run.iterations = r.iterations + polished.iterations;
    run.converged = ok;
    total_iter += run.iterations;
    any_converged = any_converged || ok;
    if ((ok && !best.converged) || (ok == best.converged && run.f < best.f)) best = run;
  }

  const auto p = decode(best.x);
  FitResult fr;
  fr.alignment = alignment_from_top(p[0], p[1], p[2], cfg.y100, q_full, curves.id);
  const double y0 = fr.alignment.y_0, x0 = fr.alignment.x_0;
  const double excess = std::max(0.0, y0 - 1.0) + std::max(0.0, -x0);
  fr.rmse = std::sqrt(std::max(0.0, best.f - excess - excess * excess));
  fr.iterations = total_iter;
  fr.converged = any_converged;
  if (!any_converged) throw ConvergenceError("fit: no start converged within the iteration budget", fr);
  return fr;
}

}  // namespace fbench
