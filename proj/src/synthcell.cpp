#include "fbench/synthcell.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "fbench/errors.hpp"
#include "fbench/parallel.hpp"
#include "fbench/pipeline.hpp"

namespace fbench {

double FadeModel::retention(double n) const {
  const double z = (n - knee_cycle) / knee_width;
  // log1p(exp(z)) without overflow for large z.
  const double softplus = z > 30.0 ? z : std::log1p(std::exp(z));
  return 1.0 - plateau_rate * n - post_knee_rate * knee_width * softplus;
}

double FadeModel::crossing(double level) const {
  double hi = knee_cycle + 1.0;
  while (retention(hi) > level) hi *= 2.0;
  return bisect([&](double n) { return retention(n) - level; }, 0.0, hi, 1e-10);
}

void FadeModel::validate() const {
  if (!(plateau_rate >= 0.0 && post_knee_rate >= 0.0)) throw ConfigError("fade rates must be non-negative");
  if (!(knee_cycle > 0.0 && knee_width > 0.0)) throw ConfigError("knee cycle and width must be positive");
}

void SynthCellSpec::validate() const {
  alignment_truth.validate();
  rmodel_truth.validate();
  fade.validate();
  if (!(sei_loss_formation >= 0.0)) throw ConfigError("SEI loss must be non-negative");
  if (!(noise.voltage_sd >= 0.0 && noise.current_sd >= 0.0)) throw ConfigError("noise sds must be non-negative");
  if (!(nominal_capacity > 0.0 && sample_interval > 0.0)) throw ConfigError("nominal capacity and sample interval must be positive");
}

const char* to_string(FormationProtocol p) { return p == FormationProtocol::fast ? "fast" : "baseline"; }

FormationProtocol protocol_from_string(const std::string& s) {
  if (s == "fast") return FormationProtocol::fast;
  if (s == "baseline") return FormationProtocol::baseline;
  throw ConfigError("protocol must be 'fast' or 'baseline', got '" + s + "'");
}

namespace {

constexpr double kStepGap = 1e-3;  // s between the last sample of a step and the first of the next
constexpr double kPulseShape = 0.6;
constexpr double kPulseTau = 3.0;

// Fraction of the 10 s pulse voltage drop reached after t seconds.
double pulse_shape(double t) {
  auto raw = [](double x) { return kPulseShape + (1.0 - kPulseShape) * (1.0 - std::exp(-x / kPulseTau)); };
  return raw(t) / raw(10.0);
}

// Drives the truth cell through a protocol and records what a cycler would log.
class Bench {
 public:
  explicit Bench(const SynthCellSpec& spec) : s_(spec), a_(spec.alignment_truth), rng_(spec.seed) {
    s_.validate();
  }

  double q() const { return q_; }
  void set_q(double q) { q_ = q; }
  double ocv(double q) const { return full_cell_voltage(a_, default_curves(), std::clamp(q, 0.0, a_.q_full)); }
  double res(double q) const { return s_.rmodel_truth.r_full(a_.y_at(std::clamp(q, 0.0, a_.q_full))); }
  CyclerTimeSeries take() {
    series_.has_temperature = true;
    return std::move(series_);
  }
  std::vector<StepTruth>& steps() { return steps_; }

  void begin_step(int direction) {
    if (direction > 0 && last_dir_ < 0) {
      ++cycle_;
      cum_c_ = cum_d_ = 0.0;
      have_prev_ = false;
    }
    if (direction != 0) last_dir_ = direction;
    ++step_;
    steps_.push_back(StepTruth{step_, 0.0, -1.0});
    have_step_prev_ = false;
    t_ = series_.records.empty() ? 0.0 : series_.records.back().test_time + kStepGap;
  }

  /// Constant current until the loaded voltage reaches v_cut. `sei` Ah of
  /// the passed charge is consumed irreversibly. Returns the end state.
  double cc_to_voltage(double current, double v_cut, double sei = 0.0) {
    auto f = [&](double q) { return ocv(q) + current * res(q) - v_cut; };
    const double q_end = current > 0 ? first_crossing(f, q_, a_.q_full) : first_crossing(f, q_, 0.0);
    cc_by_charge(current, std::abs(q_end - q_), sei);
    q_ = q_end;
    return q_end;
  }

  /// Constant current moving the cyclable state by dq_cyc Ah.
  void cc_by_charge(double current, double dq_cyc, double sei = 0.0) {
    const double passed = dq_cyc + sei;
    const double phi = passed > 0.0 ? sei / passed : 0.0;
    const double sign = current > 0 ? 1.0 : -1.0;
    const double duration = passed * 3600.0 / std::abs(current);
    const double q0 = q_;
    for (double t : sample_times(duration, s_.sample_interval)) {
      const double q = q0 + sign * (1.0 - phi) * std::abs(current) * t / 3600.0;
      emit(t_ + t, current, ocv(q) + current * res(q), false);
    }
    q_ = q0 + sign * dq_cyc;
    t_ = series_.records.back().test_time;
  }

  /// Constant-voltage hold continuing the current step until the current
  /// decays from i0 to i_end; the decay constant is solved so the logged
  /// charge lands the state exactly where the loaded voltage at i_end
  /// equals v_hold.
  void cv(double v_hold, double i0, double i_end) {
    auto f = [&](double q) { return ocv(q) + i_end * res(q) - v_hold; };
    const double q_top = first_crossing(f, q_, a_.q_full);
    const double dq = q_top - q_;
    if (!(dq > 0.0)) return;
    steps_.back().cv_switch_time = t_;
    const double ratio = std::log(i0 / i_end);
    auto logged = [&](double tau) {
      const auto ts = sample_times(tau * ratio, s_.sample_interval);
      double acc = 0.0;
      for (std::size_t k = 1; k < ts.size(); ++k) {
        acc += 0.5 * i0 * (std::exp(-ts[k] / tau) + std::exp(-ts[k - 1] / tau)) * (ts[k] - ts[k - 1]);
      }
      return acc / 3600.0;
    };
    const double tau = bisect([&](double tau) { return logged(tau) - dq; }, 1e-3, 1e7, 1e-12);
    const auto ts = sample_times(tau * ratio, s_.sample_interval);
    double prev_i = i0;
    for (std::size_t k = 1; k < ts.size(); ++k) {
      const double i = k + 1 == ts.size() ? i_end : i0 * std::exp(-ts[k] / tau);
      q_ += 0.5 * (i + prev_i) * (ts[k] - ts[k - 1]) / 3600.0;
      prev_i = i;
      emit(t_ + ts[k], i, v_hold, false);
    }
    t_ = series_.records.back().test_time;
  }

  void rest(double duration, double dt) {
    for (double t : sample_times(duration, dt)) emit(t_ + t, 0.0, ocv(q_), true);
    t_ = series_.records.back().test_time;
  }

  /// 10 s pulse with 1 s records; the equilibrium voltage is held at its
  /// pre-pulse value and the drop follows pulse_shape.
  void pulse(double current, double r) {
    const double v_ocv = ocv(q_);
    for (int k = 0; k <= 10; ++k) emit(t_ + k, current, v_ocv + current * r * pulse_shape(k), false);
    q_ += current * 10.0 / 3600.0;
    t_ = series_.records.back().test_time;
  }

 private:
  static std::vector<double> sample_times(double duration, double dt) {
    std::vector<double> ts;
    for (double t = 0.0; t < duration - 1e-6; t = static_cast<double>(ts.size()) * dt) ts.push_back(t);
    ts.push_back(duration);
    return ts;
  }

  // First root of f moving from `from` toward `to`; f(from) must not have
  // crossed already.
  static double first_crossing(const std::function<double(double)>& f, double from, double to) {
    const int n = 4000;
    double prev = from;
    double fp = f(from);
    if (to > from ? fp >= 0.0 : fp <= 0.0) throw DomainError("protocol step starts beyond its voltage limit");
    for (int k = 1; k <= n; ++k) {
      const double x = from + (to - from) * k / n;
      const double fx = f(x);
      if (to > from ? fx >= 0.0 : fx <= 0.0) return bisect(f, prev, x, 1e-15);
      prev = x;
    }
    // The loaded voltage never reaches the limit inside the window; the
    // step ends at the window edge instead.
    return to;
  }

  void emit(double t, double i_true, double v_true, bool is_rest) {
    auto& st = steps_.back();
    if (have_step_prev_) st.charge_ah += 0.5 * (std::abs(i_true) + std::abs(step_prev_i_)) * (t - step_prev_t_) / 3600.0;
    step_prev_i_ = i_true;
    step_prev_t_ = t;
    have_step_prev_ = true;

    CyclerRecord r;
    r.test_time = t;
    r.cycle_index = cycle_;
    r.step_index = step_;
    r.current = i_true;
    r.voltage = v_true;
    if (s_.noise.current_sd > 0.0 && !is_rest) r.current += s_.noise.current_sd * gauss_(rng_);
    if (s_.noise.voltage_sd > 0.0) r.voltage += s_.noise.voltage_sd * gauss_(rng_);
    if (have_prev_) {
      const double dt = (t - prev_t_) / 3600.0;
      cum_c_ += 0.5 * (std::max(r.current, 0.0) + std::max(prev_i_, 0.0)) * dt;
      cum_d_ += 0.5 * (std::max(-r.current, 0.0) + std::max(-prev_i_, 0.0)) * dt;
    }
    prev_t_ = t;
    prev_i_ = r.current;
    have_prev_ = true;
    r.charge_capacity = cum_c_;
    r.discharge_capacity = cum_d_;
    r.temperature = s_.temperature_c;
    series_.records.push_back(r);
  }

  SynthCellSpec s_;
  ElectrodeAlignment a_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  CyclerTimeSeries series_;
  std::vector<StepTruth> steps_;
  double q_ = 0.0, t_ = 0.0;
  long long cycle_ = 1, step_ = 0;
  int last_dir_ = 0;
  double cum_c_ = 0.0, cum_d_ = 0.0, prev_t_ = 0.0, prev_i_ = 0.0;
  bool have_prev_ = false;
  double step_prev_t_ = 0.0, step_prev_i_ = 0.0;
  bool have_step_prev_ = false;
};

// Cyclable state where a discharge at `current` reaches v_cut under load.
double loaded_floor(const Bench& b, double current, double v_cut, double q_hi) {
  return bisect([&](double q) { return b.ocv(q) - current * b.res(q) - v_cut; }, 0.0, q_hi, 1e-15);
}

}  // namespace

GeneratedFormation generate_formation(const SynthCellSpec& spec, FormationProtocol protocol) {
  Bench b(spec);
  const double c = spec.nominal_capacity;
  const double c10 = c / 10.0, c5 = c / 5.0, c100 = c / 100.0;
  const double q_floor = loaded_floor(b, c10, 3.0, spec.alignment_truth.q_full);
  b.set_q(q_floor);
  using K = SegmentKind;
  GeneratedFormation g;
  auto& kinds = g.truth.expected_kinds;
  std::vector<std::size_t> first_charge_steps;

  auto cccv = [&](double i, double sei) {
    b.begin_step(+1);
    b.cc_to_voltage(i, 4.2, sei);
    b.cv(4.2, i, c100);
    kinds.insert(kinds.end(), {K::cc_charge, K::cv_charge});
  };
  auto discharge = [&](double i, double v_cut) {
    b.begin_step(-1);
    b.cc_to_voltage(-i, v_cut);
    kinds.push_back(K::cc_discharge);
  };

  if (protocol == FormationProtocol::fast) {
    b.begin_step(+1);
    b.cc_to_voltage(c, 3.9, spec.sei_loss_formation);
    kinds.push_back(K::cc_charge);
    cccv(c5, 0.0);
    for (int k = 0; k < 5; ++k) {
      discharge(c5, 3.9);
      cccv(c5, 0.0);
    }
    discharge(c, 2.5);
    cccv(c10, 0.0);
  } else {
    cccv(c10, spec.sei_loss_formation);
    for (int k = 0; k < 2; ++k) {
      discharge(c10, 3.0);
      cccv(c10, 0.0);
    }
  }
  b.begin_step(0);
  b.rest(6.0 * 3600.0, 60.0);
  kinds.push_back(K::rest);
  discharge(c10, 3.0);

  g.truth.steps = b.steps();
  g.truth.sei_loss = spec.sei_loss_formation;
  const auto& steps = g.truth.steps;
  const std::size_t first_charges = protocol == FormationProtocol::fast ? 2 : 1;
  double q_c = 0.0;
  for (std::size_t k = 0; k < first_charges; ++k) q_c += steps[k].charge_ah;
  g.truth.features = FormationFeatures::from(q_c, steps.back().charge_ah);
  g.series = b.take();
  return g;
}

std::vector<double> default_hppc_soc_points() {
  return {0.04, 0.05, 0.06, 0.08, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.95};
}

GeneratedHppc generate_hppc(const SynthCellSpec& spec, const std::vector<double>& soc_points) {
  for (std::size_t i = 0; i < soc_points.size(); ++i) {
    if (!(soc_points[i] > 0.0 && soc_points[i] < 1.0)) throw ConfigError("HPPC SOC points must lie in (0, 1)");
    if (i > 0 && !(soc_points[i] > soc_points[i - 1])) throw ConfigError("HPPC SOC points must ascend");
  }
  Bench b(spec);
  const double c = spec.nominal_capacity, c20 = c / 20.0;
  GeneratedHppc g;
  b.set_q(spec.alignment_truth.q_full);
  b.begin_step(0);
  b.rest(600.0, 60.0);
  b.begin_step(-1);
  const double q_full = b.q();
  const double q_end = b.cc_to_voltage(-c20, 3.0);
  g.truth.measured_capacity = q_full - q_end;
  b.begin_step(0);
  b.rest(1800.0, 60.0);

  auto planted = [&](Direction dir, double current) {
    const double r = b.res(b.q());
    PulseTruth p;
    p.soc = (b.q() - q_end) / g.truth.measured_capacity;
    p.direction = dir;
    p.current = current;
    p.r_1s = r * pulse_shape(1.0);
    p.r_5s = r * pulse_shape(5.0);
    p.r_10s = r;
    g.truth.pulses.push_back(p);
    return r;
  };

  for (double s : soc_points) {
    const double target = q_end + s * g.truth.measured_capacity;
    if (target > b.q()) {
      b.begin_step(+1);
      b.cc_by_charge(c20, target - b.q());
    }
    b.begin_step(0);
    b.rest(1800.0, 60.0);
    b.begin_step(-1);
    b.pulse(-c, planted(Direction::discharge, -c));
    b.begin_step(0);
    b.rest(600.0, 60.0);
    b.begin_step(+1);
    b.pulse(c, planted(Direction::charge, c));
    b.begin_step(0);
    b.rest(600.0, 60.0);
  }
  g.series = b.take();
  return g;
}

QVCurve aged_discharge_curve(const ElectrodeAlignment& fresh, double retention, std::size_t n) {
  if (!(retention > 0.0 && retention <= 1.0)) throw DomainError("retention must lie in (0, 1]");
  const auto& curves = default_curves();
  ElectrodeAlignment aged = fresh;
  if (retention < 1.0) {
    const double target = retention * fresh.q_full;
    const double hi = (1.0 - retention) * fresh.q_full / 0.8;
    const double d = bisect([&](double x) { return shift_lithium_signed(fresh, x, curves).q_full - target; }, 0.0, hi,
                            1e-14);
    aged = shift_lithium_signed(fresh, d, curves);
  }
  QVCurve c;
  for (double qd : linspace(0.0, aged.q_full, n)) {
    c.q.push_back(qd);
    c.v.push_back(full_cell_voltage(aged, curves, aged.q_full - qd));
  }
  return c;
}

CapacitySeries generate_cycling(const SynthCellSpec& spec, int rpt_every, int max_cycles) {
  spec.fade.validate();
  std::mt19937_64 rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sd = spec.noise.current_sd > 0.0 ? 5e-4 : 0.0;
  const double q20 = spec.alignment_truth.q_full;
  // Regular cycles run at a higher rate and deliver slightly less than C/20.
  const double q_reg = 0.97 * q20;
  CapacitySeries s;
  for (int n = 1; n <= max_cycles; ++n) {
    const double r = spec.fade.retention(n);
    const bool rpt = rpt_every > 0 && n % rpt_every == 0;
    s.cycle.push_back(n);
    s.capacity.push_back((rpt ? q20 : q_reg) * r + sd * gauss(rng));
    s.is_rpt.push_back(rpt);
    if (r < 0.45) break;
  }
  return s;
}

CellDraw draw_cell_parameters(const FleetConfig& cfg, std::size_t index) {
  std::mt19937_64 rng(cfg.seed + index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CellDraw d;
  const auto fi = static_cast<double>(index);
  d.fast = std::floor((fi + 1.0) * cfg.fast_fraction) > std::floor(fi * cfg.fast_fraction);
  const double mean = cfg.sei_baseline_mean + (d.fast ? cfg.qlli_offset : 0.0);
  const double sd = d.fast ? cfg.sei_fast_sd : cfg.sei_baseline_sd;
  d.sei_loss = std::max(0.0, mean + sd * gauss(rng));
  d.cap_pe = 1.0 + cfg.capacity_sd * gauss(rng);
  d.cap_ne = 1.0 + cfg.capacity_sd * gauss(rng);
  const double life_eps = gauss(rng);
  const double knee =
      (cfg.knee_ref + cfg.knee_slope * (d.sei_loss - cfg.sei_baseline_mean)) * (1.0 + cfg.life_noise * life_eps);
  d.knee_cycle = std::max(50.0, knee);
  return d;
}

SynthCell generate_cell(const FleetConfig& cfg, std::size_t index) {
  SynthCell cell;
  cell.cell_id = "cell" + std::string(index < 10 ? "00" : index < 100 ? "0" : "") + std::to_string(index);
  const CellDraw draw = draw_cell_parameters(cfg, index);
  const auto protocol = draw.fast ? FormationProtocol::fast : FormationProtocol::baseline;
  cell.group = to_string(protocol);
  cell.temperature_label = cfg.temperatures.empty() ? "room" : cfg.temperatures[(index / 2) % cfg.temperatures.size()];
  const double sei = draw.sei_loss, cap_pe = draw.cap_pe, cap_ne = draw.cap_ne;

  const auto ref = default_alignment();
  const double q_li = ref.q_li() - (sei - cfg.sei_baseline_mean);
  auto& spec = cell.spec;
  spec.alignment_truth = solve_windows(ref.c_pe * cap_pe, ref.c_ne * cap_ne, q_li, default_curves());
  spec.sei_loss_formation = sei;
  spec.noise = cfg.noise;
  spec.seed = cfg.seed + index;
  spec.temperature_c = cell.temperature_label == "45C" ? 45.0 : 25.0;
  spec.fade.knee_cycle = draw.knee_cycle;

  cell.truth.sei_loss = sei;
  cell.truth.knee_cycle = spec.fade.knee_cycle;
  cell.truth.alignment = spec.alignment_truth;

  cell.formation = generate_formation(spec, protocol);
  cell.hppc = generate_hppc(spec, default_hppc_soc_points());
  // Planted R_LS on the same SOC basis the pipeline uses: 5% of the measured
  // C/20 capacity above the loaded lower cut.
  const double cap = cell.hppc.truth.measured_capacity;
  const auto& a = spec.alignment_truth;
  cell.truth.r_ls_planted = spec.rmodel_truth.r_full(a.y_at(a.q_full - cap + 0.05 * cap));
  cell.cycling = generate_cycling(spec);
  cell.qv_cycle10 = aged_discharge_curve(spec.alignment_truth, spec.fade.retention(10));
  cell.qv_cycle100 = aged_discharge_curve(spec.alignment_truth, spec.fade.retention(100));
  return cell;
}

Fleet generate_fleet(const FleetConfig& cfg) {
  if (cfg.n_cells < 4) throw ConfigError("fleet needs at least 4 cells");
  if (!(cfg.fast_fraction >= 0.0 && cfg.fast_fraction <= 1.0)) throw ConfigError("fast fraction must lie in [0, 1]");
  Fleet f;
  f.cells.resize(cfg.n_cells);
  f.features.resize(cfg.n_cells);
  f.outcomes.resize(cfg.n_cells);
  parallel_for(cfg.n_cells, [&](std::size_t i) {
    f.cells[i] = generate_cell(cfg, i);
    const auto& c = f.cells[i];
    CellData data{c.cell_id, c.group, c.temperature_label, c.formation.series, c.hppc.series, c.cycling,
                  c.qv_cycle10, c.qv_cycle100};
    const auto feats = compute_cell_features(data);
    f.features[i] = feats.record;
    f.outcomes[i] = feats.outcome;
  });
  return f;
}

}  // namespace fbench
