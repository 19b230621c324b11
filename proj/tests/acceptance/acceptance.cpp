// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fbench/cli.hpp"
#include "fbench/degmode.hpp"
#include "fbench/features.hpp"
#include "fbench/hppc.hpp"
#include "fbench/ocv.hpp"
#include "fbench/predict.hpp"
#include "fbench/snr.hpp"
#include "fbench/stats.hpp"
#include "fbench/stoichsim.hpp"
#include "fbench/synthcell.hpp"

namespace fs = std::filesystem;
using namespace fbench;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1. Instrument resolution arithmetic.
Outcome c1_snr() {
  Outcome o;
  const InstrumentSpec spec;
  const auto lim = resolution_limits(spec);
  const auto rep = qlli_resolution(lim, kStatedSensR, kStatedSensQd);
  o.require(std::abs(lim.i_err - 1e-3) < 1e-15, fmt("i_err %.6g A", lim.i_err));
  o.require(std::abs(lim.v_err - 1e-3) < 1e-15, fmt("v_err %.6g V", lim.v_err));
  o.require(std::abs(lim.r_limit * 1e3 - 0.88) <= 0.005, fmt("r_limit %.4f mOhm", lim.r_limit * 1e3));
  o.require(std::abs(lim.q_limit - 0.020) < 1e-15, fmt("q_limit %.6g Ah", lim.q_limit));
  o.require(rep.improvement_ratio >= 5.0 && rep.improvement_ratio <= 6.5, fmt("ratio %.3f", rep.improvement_ratio));
  if (o.pass) {
    o.detail = fmt("r_limit %.4f mOhm, q_limit %.1f mAh, ratio %.3f", lim.r_limit * 1e3, lim.q_limit * 1e3,
                   rep.improvement_ratio);
  }
  return o;
}

// 2. Group tests on summary-statistic samples.
Outcome c2_table_stats() {
  Outcome o;
  const auto qd_a = exact_moment_sample(2370.0, 11.0, 19, 1), qd_b = exact_moment_sample(2362.0, 7.0, 20, 2);
  const auto ce_a = exact_moment_sample(48.7, 1.6, 9, 3), ce_b = exact_moment_sample(43.8, 1.1, 10, 4);
  double p_pooled = 0.0, p_welch = 0.0;
  for (auto v : {TVariant::pooled, TVariant::welch}) {
    const double p = two_sample_t(qd_a, qd_b, v).p_value;
    (v == TVariant::pooled ? p_pooled : p_welch) = p;
    o.require(p >= 0.008 && p <= 0.015, fmt("q_d p %.4f", p));
    const double p2 = two_sample_t(ce_a, ce_b, v).p_value;
    o.require(p2 < 1e-3, fmt("second pair p %.2e", p2));
  }
  if (o.pass) {
    o.detail = fmt("q_d p pooled %.4f welch %.4f; second pair p %.1e", p_pooled, p_welch,
                   two_sample_t(ce_a, ce_b).p_value);
  }
  return o;
}

// 3. OCV alignment round trip.
Outcome c3_ocv() {
  Outcome o;
  const auto& curves = default_curves();
  const auto truth = default_alignment();
  auto worst = [&](const ElectrodeAlignment& a) {
    return std::max({std::abs(a.c_pe / truth.c_pe - 1.0), std::abs(a.c_ne / truth.c_ne - 1.0),
                     std::abs(a.x_100 / truth.x_100 - 1.0)});
  };
  const double clean = worst(fit_electrode_alignment(synthesize_curve(truth, curves, 500), curves).alignment);
  o.require(clean < 0.003, fmt("noise-free error %.3g%%", clean * 100));
  std::vector<double> errs;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto c = synthesize_curve(truth, curves, 500);
    std::mt19937_64 rng(1000 + seed);
    std::normal_distribution<double> noise(0.0, 0.002);
    for (auto& v : c.v) v += noise(rng);
    errs.push_back(worst(fit_electrode_alignment(c, curves).alignment));
  }
  std::nth_element(errs.begin(), errs.begin() + 25, errs.end());
  const double upper = errs[25];
  std::nth_element(errs.begin(), errs.begin() + 24, errs.begin() + 25);
  const double median = 0.5 * (errs[24] + upper);
  o.require(median < 0.015, fmt("noisy median error %.3g%%", median * 100));
  if (o.pass) o.detail = fmt("noise-free max rel err %.4f%%, 2 mV noise median %.3f%% over 50 seeds", clean * 100, median * 100);
  return o;
}

// 4. Degradation-mode recovery from planted fade.
Outcome c4_degmode() {
  Outcome o;
  const auto& curves = default_curves();
  const auto fresh = default_alignment();
  std::vector<RptCurve> rpts{{0, aged_discharge_curve(fresh, 1.0)}};
  const std::vector<double> planted{0.04, 0.12, 0.24};
  for (std::size_t k = 0; k < planted.size(); ++k) {
    rpts.push_back({static_cast<int>(100 * (k + 1)),
                    aged_discharge_curve(shift_lithium_inventory(fresh, planted[k] * fresh.q_li(), curves), 1.0)});
  }
  const auto states = degradation_trajectory(rpts, curves);
  double worst_lli = 0.0, worst_lam = 0.0;
  for (std::size_t k = 0; k < planted.size(); ++k) {
    const auto& s = states.at(k + 1);
    if (s.gap) {
      o.require(false, "gap at planted LLI " + std::to_string(planted[k]));
      continue;
    }
    worst_lli = std::max(worst_lli, std::abs(s.lli - planted[k]));
    worst_lam = std::max({worst_lam, std::abs(s.lam_pe), std::abs(s.lam_ne)});
  }
  o.require(worst_lli <= 0.02, fmt("LLI error %.4f", worst_lli));
  o.require(worst_lam < 0.02, fmt("spurious LAM %.4f", worst_lam));
  const auto lam = apply_lam(fresh, Electrode::positive, LamPhase::delithiated, 0.10, curves);
  const auto lam_states =
      degradation_trajectory({{0, aged_discharge_curve(fresh, 1.0)}, {100, aged_discharge_curve(lam, 1.0)}}, curves);
  const double lam_err = lam_states[1].gap ? 1.0 : std::abs(lam_states[1].lam_pe - 0.10);
  o.require(lam_err <= 0.02, fmt("LAM_PE error %.4f", lam_err));
  if (o.pass) {
    o.detail = fmt("max LLI error %.4f, max |LAM| %.4f, LAM_PE 10%% error %.4f", worst_lli, worst_lam, lam_err);
  }
  return o;
}

// 5. Stoichiometry-model sign matrix and sensitivities.
Outcome c5_sign_matrix() {
  Outcome o;
  const auto& curves = default_curves();
  const auto a = default_alignment();
  const auto m = ResistanceModel::default_model();
  const double rls0 = resistance_at_model_soc(a, m, 0.05), r90_0 = resistance_at_model_soc(a, m, 0.9);
  for (double d : {0.005, 0.023, 0.05, 0.1}) {
    const auto b = shift_lithium_inventory(a, d, curves);
    o.require(resistance_at_model_soc(b, m, 0.05) < rls0, fmt("R_LS did not fall at %.3f Ah", d));
    o.require(std::abs(resistance_at_model_soc(b, m, 0.9) / r90_0 - 1.0) < 0.01, fmt("R_90 moved at %.3f Ah", d));
  }
  const auto rep = rls_sensitivity(a, m, {0.02, 0.05, 0.08}, default_qlli_grid(), curves);
  const double qd = -rep.dQd_dQlli;
  o.require(qd >= 0.8 && qd <= 1.0, fmt("Q_d sensitivity %.3f", qd));
  o.require(std::abs(rep.dR_dQlli[0]) > std::abs(rep.dR_dQlli[1]) && std::abs(rep.dR_dQlli[1]) > std::abs(rep.dR_dQlli[2]),
            "|dR/dQ_LLI| not increasing toward low SOC");

  // LAM cases: change in R_LS and in capacity for 15% loss.
  auto lam = [&](Electrode e, LamPhase p) {
    const auto b = apply_lam(a, e, p, 0.15, curves);
    return std::pair{resistance_at_model_soc(b, m, 0.05) - rls0, (b.q_full - a.q_full) / a.q_full};
  };
  const auto [dr_pd, dq_pd] = lam(Electrode::positive, LamPhase::delithiated);
  const auto [dr_pl, dq_pl] = lam(Electrode::positive, LamPhase::lithiated);
  const auto [dr_nl, dq_nl] = lam(Electrode::negative, LamPhase::lithiated);
  const auto [dr_nd, dq_nd] = lam(Electrode::negative, LamPhase::delithiated);
  o.require(dr_pd > 0.0 && std::abs(dq_pd) < 0.01, "LAM_PE delithiated pattern");
  o.require(dq_pl < 0.0 && std::abs(dr_pl) < 0.1 * std::abs(dr_pd), "LAM_PE lithiated pattern");
  o.require(dr_nl < 0.0 && dq_nl < 0.0, "LAM_NE lithiated pattern");
  o.require(dq_nd < 0.0 && std::abs(dr_nd) < 0.1 * std::abs(dr_pd), "LAM_NE delithiated pattern");
  if (o.pass) {
    o.detail = fmt("|dR/dQ_LLI| %.3f > %.3f > %.3f mOhm/mAh, dQ_d/dQ_LLI %.3f", std::abs(rep.dR_dQlli[0]),
                   std::abs(rep.dR_dQlli[1]), std::abs(rep.dR_dQlli[2]), qd);
  }
  return o;
}

// 6. Positive-electrode share sweep.
Outcome c6_fpos() {
  Outcome o;
  const auto rows =
      fpos_sweep(default_alignment(), ResistanceModel::default_model(), linspace(0.0, 1.0, 21), default_curves());
  double at25 = -1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) o.require(rows[i].normalized >= rows[i - 1].normalized, fmt("not monotone at f_pos %.2f", rows[i].f_pos));
    if (std::abs(rows[i].f_pos - 0.25) < 1e-12) at25 = rows[i].normalized;
  }
  o.require(at25 >= 0.0 && at25 < 0.5, fmt("normalized at 0.25 is %.3f", at25));
  if (o.pass) o.detail = fmt("monotone over 21 points, normalized(0.25) = %.3f", at25);
  return o;
}

// 7. Life prediction protocol on a synthetic fleet.
Outcome c7_prediction() {
  Outcome o;
  FleetConfig fc;
  fc.n_cells = 39;
  fc.seed = 2024;
  const auto fleet = generate_fleet(fc);
  Dataset d;
  d.columns = {"r_ls_ohm"};
  d.x.resize(39, 1);
  d.y.resize(39);
  for (std::size_t i = 0; i < 39; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    d.cell_ids.push_back(fleet.features[i].cell_id);
    d.x(r, 0) = fleet.features[i].r_ls;
    const auto& life = fleet.outcomes[i].cycles_to_retention.at(70);
    o.require(!life.censored, "censored life for " + fleet.features[i].cell_id);
    d.y(r) = life.cycles;
  }
  CvConfig cv;
  cv.n_runs = 1000;
  cv.inner_folds = 4;
  const auto dummy = nested_cv(d, {"r_ls_ohm"}, cv, ModelKind::dummy);
  const auto ridge = nested_cv(d, {"r_ls_ohm"}, cv, ModelKind::ridge);
  const auto again = nested_cv(d, {"r_ls_ohm"}, cv, ModelKind::ridge);
  o.require(report_json(ridge) == report_json(again), "ridge report not deterministic");

  const std::vector<double> life(d.y.data(), d.y.data() + d.y.size());
  const double cv_life = stddev_sample(life) / mean(life);
  // Held-out mean error of a constant predictor: |N(0, CV^2 (1/n_train + 1/n_val))|.
  const double floor = std::sqrt(2.0 / M_PI) * cv_life * std::sqrt(1.0 / 31.0 + 1.0 / 8.0) * 100.0;
  const double gap = dummy.test_mpe_mean - ridge.test_mpe_mean;
  o.require(gap >= 3.0, fmt("ridge only %.2f pp below dummy", gap));
  o.require(std::abs(dummy.test_mpe_mean / floor - 1.0) <= 0.30,
            fmt("dummy %.2f%% vs floor %.2f%%", dummy.test_mpe_mean, floor));
  if (o.pass) {
    o.detail = fmt("dummy %.2f%% (sd %.2f), ridge R_LS %.2f%% (sd %.2f)", dummy.test_mpe_mean, dummy.test_mpe_sd,
                   ridge.test_mpe_mean, ridge.test_mpe_sd) +
               fmt(", floor %.2f%%, life CV %.3f", floor, cv_life);
  }
  return o;
}

// 8. Feature extraction oracles.
Outcome c8_features() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 1000;
  auto curve = [&](double scale) {
    const double a = u(rng), b = u(rng);
    QVCurve c;
    for (std::size_t k = n; k-- > 0;) {
      const double v = 3.0 + 1.2 * static_cast<double>(k) / static_cast<double>(n - 1), s = (4.2 - v) / 1.2;
      c.v.push_back(v);
      c.q.push_back(scale * (s + 0.05 * a * std::sin(3.0 * s) + 0.03 * b * s * s));
    }
    return c;
  };
  double worst_var = 0.0, worst_offset = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = curve(2.4), l = curve(2.2);
    long double m = 0.0L, ss = 0.0L;
    for (std::size_t i = 0; i < n; ++i) m += static_cast<long double>(l.q[i]) - e.q[i];
    m /= n;
    for (std::size_t i = 0; i < n; ++i) {
      const long double dd = static_cast<long double>(l.q[i]) - e.q[i] - m;
      ss += dd * dd;
    }
    worst_var = std::max(worst_var, std::abs(var_delta_q(e, l) - static_cast<double>(ss / n)));
    auto shifted = e;
    for (auto& q : shifted.q) q += 0.1 + 0.01 * trial;
    worst_offset = std::max(worst_offset, std::abs(var_delta_q(e, shifted)));
  }
  o.require(worst_var <= 1e-12, fmt("var_delta_q error %.3g", worst_var));
  o.require(worst_offset <= 1e-12, fmt("offset variance %.3g", worst_offset));

  double worst_life = 0.0;
  for (double knee : {200.0, 450.0, 800.0}) {
    FadeModel f;
    f.knee_cycle = knee;
    std::vector<double> cyc, cap;
    for (int k = 1; k <= 4000; ++k) {
      cyc.push_back(k);
      cap.push_back(2.4 * f.retention(k));
    }
    for (double level : {0.5, 0.6, 0.7, 0.8}) {
      worst_life = std::max(worst_life, std::abs(cycle_life(cyc, cap, 2.4, level).cycles - f.crossing(level)));
    }
  }
  o.require(worst_life <= 0.5, fmt("cycle_life error %.3f cycles", worst_life));

  const auto h = generate_hppc(SynthCellSpec{}, default_hppc_soc_points());
  const auto p = extract_pulses(h.series);
  double worst_r = 0.0;
  std::size_t matched = 0;
  for (const auto& t : h.truth.pulses) {
    for (const auto& mm : p.pulses) {
      if (mm.direction != t.direction || std::abs(mm.soc - t.soc) > 1e-6) continue;
      const double planted = mm.duration == 1.0 ? t.r_1s : mm.duration == 5.0 ? t.r_5s : t.r_10s;
      worst_r = std::max(worst_r, std::abs(mm.resistance - planted));
      ++matched;
    }
  }
  o.require(matched == 3 * h.truth.pulses.size(), "unmatched HPPC pulses");
  o.require(worst_r <= 1e-6, fmt("HPPC error %.3g ohm", worst_r));
  if (o.pass) {
    o.detail = fmt("var_dq err %.1e, cycle_life err %.3f cyc, HPPC err %.1e ohm over %.0f pulses", worst_var, worst_life,
                   worst_r, static_cast<double>(matched));
  }
  return o;
}

// 9. Statistics calibration.
Outcome c9_calibration() {
  Outcome o;
  std::mt19937_64 rng(9);
  const int trials = 2000;
  int rejected = 0;
  for (int t = 0; t < trials; ++t) {
    std::normal_distribution<double> ga(100.0, 10.0), gb(40.0, 4.0);
    std::vector<double> a(10), b(10);
    for (auto& x : a) x = ga(rng);
    for (auto& x : b) x = gb(rng);
    MslrConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    rejected += cv_equality_mslr({a, b}, cfg).p_value < 0.05;
  }
  const double rate = static_cast<double>(rejected) / trials;
  o.require(rate >= 0.03 && rate <= 0.07, fmt("type-I rate %.4f", rate));

  double worst = 0.0;
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(15), y(15);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = 0.4 * x[i] + g(rng);
    }
    long double mx = 0, my = 0, sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    worst = std::max(worst, std::abs(pearson(x, y).statistic - static_cast<double>(sxy / std::sqrt(sxx * syy))));
  }
  o.require(worst <= 1e-12, fmt("pearson error %.3g", worst));
  if (o.pass) o.detail = fmt("MSLR type-I %.4f over 2000 trials, pearson err %.1e", rate, worst);
  return o;
}

// 10. CLI determinism.
int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fbench");
  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  std::ostringstream out, err;
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool cli_pipeline(const fs::path& root) {
  fs::remove_all(root);
  fs::create_directories(root / "rpt");
  std::ofstream(root / "sim.json") << R"({"n_cells": 12, "temperatures": ["room", "45C"]})";
  const auto fresh = default_alignment();
  for (int k = 0; k < 3; ++k) {
    write_qv_csv((root / "rpt" / ("rpt_" + std::to_string(100 * k) + ".csv")).string(),
                 aged_discharge_curve(shift_lithium_inventory(fresh, 0.03 * k * fresh.q_li(), default_curves()), 1.0));
  }
  const std::string r = root.string();
  bool ok = cli({"simulate", "--config", r + "/sim.json", "--seed", "11", "--output-dir", r + "/fleet"}) == 0;
  ok = ok && cli({"features", "--input", r + "/fleet", "--output-dir", r + "/feat"}) == 0;
  ok = ok && cli({"stats", "--input", r + "/feat/features.csv", "--output-dir", r + "/stats"}) == 0;
  ok = ok && cli({"predict", "--input", r + "/feat/features.csv", "--runs", "50", "--output-dir", r + "/pred"}) == 0;
  ok = ok && cli({"hppc", "--input", r + "/fleet/cells/cell001/hppc.csv", "--output-dir", r + "/hppc"}) == 0;
  ok = ok && cli({"fit-ocv", "--input", r + "/rpt/rpt_0.csv", "--output-dir", r + "/ocv"}) == 0;
  ok = ok && cli({"degmode", "--input", r + "/rpt", "--output-dir", r + "/deg"}) == 0;
  ok = ok && cli({"sensitivity", "--output-dir", r + "/sens"}) == 0;
  ok = ok && cli({"snr", "--output-dir", r + "/snr"}) == 0;
  return ok;
}

Outcome c10_determinism() {
  Outcome o;
  const auto base = fs::temp_directory_path() / "fbench_acceptance";
  o.require(cli_pipeline(base / "a"), "first pipeline run failed");
  o.require(cli_pipeline(base / "b"), "second pipeline run failed");
  if (!o.pass) return o;
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
    const auto ext = e.path().extension();
    if (!e.is_regular_file() || (ext != ".json" && ext != ".csv")) continue;
    const auto rel = fs::relative(e.path(), base / "a");
    if (rel.begin()->string() == "rpt" || rel == "sim.json") continue;
    ++compared;
    o.require(slurp(e.path()) == slurp(base / "b" / rel), "differs: " + rel.string());
  }
  o.require(compared >= 60, "too few artifacts compared");
  if (o.pass) o.detail = std::to_string(compared) + " JSON/CSV artifacts byte-identical across reruns";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"instrument resolution", 1.0, c1_snr},
      {"formation group tests", 1.0, c2_table_stats},
      {"OCV round trip", 120.0, c3_ocv},
      {"degradation modes", 300.0, c4_degmode},
      {"stoichiometry sign matrix", 30.0, c5_sign_matrix},
      {"f_pos sweep", 30.0, c6_fpos},
      {"prediction protocol", 300.0, c7_prediction},
      {"feature oracles", 60.0, c8_features},
      {"statistics calibration", 120.0, c9_calibration},
      {"CLI determinism", 600.0, c10_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > criteria[i].budget_s) o.require(false, fmt("took %.1f s, budget %.0f s", secs, criteria[i].budget_s));
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
