#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbench/errors.hpp"
#include "fbench/numeric.hpp"

namespace fbench {

enum class Electrode { positive, negative };

/// Equilibrium potential of one electrode vs Li/Li+ over its stoichiometry.
class HalfCellCurve {
 public:
  HalfCellCurve() = default;
  /// Validates: >= 20 ascending points covering [0.005, 0.995], potential
  /// strictly decreasing with lithiation.
  HalfCellCurve(Electrode electrode, std::vector<double> stoichiometry, std::vector<double> potential);

  Electrode electrode() const { return electrode_; }
  const std::vector<double>& stoichiometry() const { return interp_.knots(); }
  const std::vector<double>& potential() const { return interp_.values(); }

  /// Potential at s, clamped to the tabulated domain; `clamped` is set when
  /// s fell outside it.
  double at(double s, bool& clamped) const { return interp_.clamp_eval(s, clamped); }
  double at(double s) const {
    bool c = false;
    return interp_.clamp_eval(s, c);
  }
  double s_min() const { return interp_.x_min(); }
  double s_max() const { return interp_.x_max(); }

 private:
  Electrode electrode_ = Electrode::positive;
  MonotoneCubic interp_;
};

struct CurvePair {
  HalfCellCurve positive;
  HalfCellCurve negative;
  /// Identity tag so alignments fitted against different curves are not mixed.
  std::string id;
};

/// Analytic synthetic potentials used for the bundled curve pair.
double synthetic_u_pos(double y);
double synthetic_u_neg(double x);

/// Bundled synthetic pair tabulated at 501 points over [0, 1].
const CurvePair& default_curves();

/// Reads `stoichiometry, potential_v` CSV.
HalfCellCurve load_half_cell_csv(const std::string& path, Electrode electrode);
void write_half_cell_csv(const std::string& path, const HalfCellCurve& curve);

struct VoltageLimits {
  double v_min = 3.0;
  double v_max = 4.2;
};

struct ElectrodeAlignment {
  double c_pe = 0.0;
  double c_ne = 0.0;
  double y_0 = 0.0;
  double y_100 = 0.0;
  double x_0 = 0.0;
  double x_100 = 0.0;
  double q_full = 0.0;
  std::string curves_id;

  /// Cyclable lithium counted at full charge.
  double q_li() const { return c_pe * y_100 + c_ne * x_100; }
  /// Throws DomainError when window ordering or capacity consistency fails.
  void validate(double tol = 1e-6) const;

  double y_at(double q) const { return y_0 - q / c_pe; }
  double x_at(double q) const { return x_0 + q / c_ne; }
};

/// Windows for the given electrode capacities and lithium inventory, solved
/// so the full cell spans exactly [v_min, v_max].
ElectrodeAlignment solve_windows(double c_pe, double c_ne, double q_li, const CurvePair& curves,
                                 const VoltageLimits& limits = {});

/// Truth alignment of the synthetic reference cell.
ElectrodeAlignment default_alignment();

/// U_pos(y(q)) - U_neg(x(q)) with q measured from 0% SOC.
double full_cell_voltage(const ElectrodeAlignment& a, const CurvePair& curves, double q,
                         bool* clamped = nullptr);

struct ElectrodeState {
  double q = 0.0;
  double y = 0.0;
  double x = 0.0;
  double u_pos = 0.0;
};

ElectrodeState electrode_window_at_voltage(const ElectrodeAlignment& a, const CurvePair& curves,
                                           double v_target);

struct QVCurve {
  std::vector<double> q;
  std::vector<double> v;
};

/// C/20 curve synthesized from an alignment on n uniform capacity points.
QVCurve synthesize_curve(const ElectrodeAlignment& a, const CurvePair& curves, std::size_t n);

struct FitConfig {
  bool fix_y100 = true;
  double y100 = 0.03;
  double c_lo = 0.5;  ///< electrode capacity bounds as multiples of q_full
  double c_hi = 2.0;
  double x100_lo = 0.5;
  double x100_hi = 1.0;
  int starts = 8;
  int max_iter = 2000;
  double f_tol = 1e-9;
  std::size_t grid_points = 1000;
  std::uint64_t seed = 0;
  /// Extra start point, e.g. the previous reference test's solution.
  std::optional<ElectrodeAlignment> seed_alignment;
};

struct FitResult {
  ElectrodeAlignment alignment;
  double rmse = 0.0;
  int iterations = 0;
  bool converged = false;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, FitResult best) : Error(what), best_(std::move(best)) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

/// Re-expresses a curve as charge from the empty end: a discharge curve
/// (voltage falling with q) becomes (q_max - q, v) in ascending order.
QVCurve orient_from_empty(const QVCurve& c);

/// Measured curve prepared for fitting: de-duplicated, shifted to start at
/// q = 0 and resampled on a uniform capacity grid.
QVCurve resample_measured(const QVCurve& measured, std::size_t n);

/// Mean squared voltage error of a candidate (c_pe, c_ne, x_100) against a
/// resampled curve, with y_100 fixed. Infeasible windows are clamped and
/// penalized.
double alignment_objective(const QVCurve& grid, const CurvePair& curves, double c_pe, double c_ne,
                           double x_100, double y_100);

ElectrodeAlignment alignment_from_top(double c_pe, double c_ne, double x_100, double y_100,
                                      double q_full, const std::string& curves_id);

FitResult fit_electrode_alignment(const QVCurve& measured, const CurvePair& curves,
                                  const FitConfig& cfg = {});

}  // namespace fbench
