#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fbench/ocv.hpp"
#include "fbench/stoichsim.hpp"

using namespace fbench;

namespace {

const CurvePair& curves() { return default_curves(); }

}  // namespace

TEST(HalfCell, BundledCurvesDecreaseStrictly) {
  for (const auto* c : {&curves().positive, &curves().negative}) {
    const auto& v = c->potential();
    for (std::size_t i = 1; i < v.size(); ++i) ASSERT_LT(v[i], v[i - 1]);
  }
}

TEST(HalfCell, BundledCsvMatchesAnalyticForm) {
  const auto pos = load_half_cell_csv(std::string(FBENCH_DATA_DIR) + "/synthetic_positive.csv", Electrode::positive);
  const auto neg = load_half_cell_csv(std::string(FBENCH_DATA_DIR) + "/synthetic_negative.csv", Electrode::negative);
  for (double s = 0.0; s <= 1.0; s += 0.002) {
    EXPECT_NEAR(pos.at(s), curves().positive.at(s), 1e-12);
    EXPECT_NEAR(neg.at(s), curves().negative.at(s), 1e-12);
  }
}

TEST(HalfCell, RejectsNonMonotoneOrShortCurves) {
  std::vector<double> s = linspace(0, 1, 30), v(30, 1.0);
  EXPECT_THROW(HalfCellCurve(Electrode::positive, s, v), ConfigError);
  EXPECT_THROW(HalfCellCurve(Electrode::positive, linspace(0, 1, 10), linspace(2, 1, 10)), ConfigError);
  EXPECT_THROW(HalfCellCurve(Electrode::positive, linspace(0.1, 1, 30), linspace(2, 1, 30)), ConfigError);
}

TEST(Alignment, TruthWindowsMatchRootFinderOnAnalyticCurves) {
  // Frozen from a bracketing root finder applied to the analytic potentials.
  const auto a = default_alignment();
  EXPECT_NEAR(a.x_0, 0.006146767679331143, 2e-5);
  EXPECT_NEAR(a.y_0, 0.7715679920393756, 2e-5);
  EXPECT_NEAR(a.x_100, 0.85, 2e-5);
  EXPECT_NEAR(a.y_100, 0.03, 2e-5);
  EXPECT_NEAR(a.q_full, 2.4471743737299345, 1e-4);
  EXPECT_NO_THROW(a.validate());
  EXPECT_NEAR(full_cell_voltage(a, curves(), 0.0), 3.0, 1e-9);
  EXPECT_NEAR(full_cell_voltage(a, curves(), a.q_full), 4.2, 1e-9);
}

TEST(Alignment, EndpointIdentities) {
  const auto a = default_alignment();
  EXPECT_DOUBLE_EQ(full_cell_voltage(a, curves(), 0.0), curves().positive.at(a.y_0) - curves().negative.at(a.x_0));
  EXPECT_DOUBLE_EQ(full_cell_voltage(a, curves(), a.q_full),
                   curves().positive.at(a.y_100) - curves().negative.at(a.x_100));
  EXPECT_THROW(full_cell_voltage(a, curves(), -0.01), DomainError);
  EXPECT_THROW(full_cell_voltage(a, curves(), a.q_full + 0.01), DomainError);
}

TEST(Alignment, MidCapacityMatchesAnalyticPotentials) {
  const auto a = default_alignment();
  for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double q = f * a.q_full;
    const double exact = synthetic_u_pos(a.y_at(q)) - synthetic_u_neg(a.x_at(q));
    EXPECT_NEAR(full_cell_voltage(a, curves(), q), exact, 1e-3);
  }
}

// Charge-direction capacity axis: voltage rises from the 0% cut to the 100% cut.
TEST(Alignment, PropertyVoltageStrictlyIncreasesWithCapacity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double c_pe = 2.8 + 0.8 * u(rng), c_ne = 2.6 + 0.6 * u(rng);
    const double q_li = 0.9 * c_ne + 0.1 * c_pe * u(rng);
    ElectrodeAlignment a;
    try {
      a = solve_windows(c_pe, c_ne, q_li, curves());
    } catch (const DomainError&) {
      continue;
    }
    a.validate();
    double prev = -1;
    for (int i = 0; i <= 200; ++i) {
      const double v = full_cell_voltage(a, curves(), a.q_full * i / 200.0);
      ASSERT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(Alignment, WindowAtVoltage) {
  const auto a = default_alignment();
  const auto lo = electrode_window_at_voltage(a, curves(), full_cell_voltage(a, curves(), 0.0));
  EXPECT_EQ(lo.q, 0.0);
  EXPECT_DOUBLE_EQ(lo.y, a.y_0);
  const auto hi = electrode_window_at_voltage(a, curves(), full_cell_voltage(a, curves(), a.q_full));
  EXPECT_DOUBLE_EQ(hi.q, a.q_full);
  const auto mid = electrode_window_at_voltage(a, curves(), 3.7);
  EXPECT_NEAR(full_cell_voltage(a, curves(), mid.q), 3.7, 1e-6);
  EXPECT_THROW(electrode_window_at_voltage(a, curves(), 4.5), DomainError);
}

TEST(Alignment, TopOfChargePositivePotentialRisesAfterLithiumLoss) {
  const auto a = default_alignment();
  const auto b = shift_lithium_inventory(a, 0.020, curves());
  const double before = electrode_window_at_voltage(a, curves(), 4.2).u_pos;
  const double after = electrode_window_at_voltage(b, curves(), 4.2).u_pos;
  EXPECT_GT(after - before, 0.0);
}

TEST(Fit, NoiseFreeSelfConsistency) {
  const auto truth = default_alignment();
  const auto curve = synthesize_curve(truth, curves(), 400);
  const auto r = fit_electrode_alignment(curve, curves());
  EXPECT_LT(std::abs(r.alignment.c_pe / truth.c_pe - 1), 0.003);
  EXPECT_LT(std::abs(r.alignment.c_ne / truth.c_ne - 1), 0.003);
  EXPECT_LT(std::abs(r.alignment.x_100 / truth.x_100 - 1), 0.003);
  EXPECT_LT(r.rmse, 0.5e-3);
  EXPECT_NO_THROW(r.alignment.validate());
}

TEST(Fit, NeverWorseThanBruteForceGrid) {
  const auto truth = solve_windows(3.1, 2.95, 3.1 * 0.03 + 2.95 * 0.83, curves());
  auto curve = synthesize_curve(truth, curves(), 300);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.002);
  for (auto& v : curve.v) v += noise(rng);
  FitConfig cfg;
  const auto grid = resample_measured(curve, cfg.grid_points);
  const double qf = grid.q.back();
  double best = 1e300;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      for (int k = 0; k <= 20; ++k) {
        const double c_pe = qf * (cfg.c_lo + (cfg.c_hi - cfg.c_lo) * i / 20.0);
        const double c_ne = qf * (cfg.c_lo + (cfg.c_hi - cfg.c_lo) * j / 20.0);
        const double x100 = cfg.x100_lo + (cfg.x100_hi - cfg.x100_lo) * k / 20.0;
        best = std::min(best, alignment_objective(grid, curves(), c_pe, c_ne, x100, cfg.y100));
      }
    }
  }
  const auto r = fit_electrode_alignment(curve, curves(), cfg);
  EXPECT_LE(r.rmse * r.rmse, best + 1e-15);
}

TEST(Fit, NoisyRecoveryWithinTolerance) {
  const auto truth = default_alignment();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto curve = synthesize_curve(truth, curves(), 500);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.002);
    for (auto& v : curve.v) v += noise(rng);
    const auto r = fit_electrode_alignment(curve, curves());
    EXPECT_LT(std::abs(r.alignment.c_pe / truth.c_pe - 1), 0.015);
    EXPECT_LT(std::abs(r.alignment.c_ne / truth.c_ne - 1), 0.015);
  }
}

TEST(Fit, RejectsInfeasibleBoundsAndShortCurves) {
  const auto curve = synthesize_curve(default_alignment(), curves(), 200);
  FitConfig cfg;
  cfg.c_hi = 0.9;
  cfg.c_lo = 0.5;
  EXPECT_THROW(fit_electrode_alignment(curve, curves(), cfg), ConfigError);
  const auto shortc = synthesize_curve(default_alignment(), curves(), 20);
  EXPECT_THROW(fit_electrode_alignment(shortc, curves()), InsufficientDataError);
}

TEST(Fit, DeterministicForSeed) {
  auto curve = synthesize_curve(default_alignment(), curves(), 300);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.002);
  for (auto& v : curve.v) v += noise(rng);
  const auto a = fit_electrode_alignment(curve, curves());
  const auto b = fit_electrode_alignment(curve, curves());
  EXPECT_EQ(a.alignment.c_pe, b.alignment.c_pe);
  EXPECT_EQ(a.rmse, b.rmse);
}
