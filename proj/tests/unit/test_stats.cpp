#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "fbench/errors.hpp"
#include "fbench/numeric.hpp"
#include "fbench/stats.hpp"

using namespace fbench;

namespace {

std::vector<double> normal_sample(std::mt19937_64& rng, double mean, double sd, std::size_t n) {
  std::normal_distribution<double> g(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Two-sided tail of Student's t by direct quadrature of the density.
double t_tail_quadrature(double t, double df) {
  const double log_c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * M_PI);
  auto density = [&](double x) { return std::exp(log_c - (df + 1.0) / 2.0 * std::log1p(x * x / df)); };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double a = std::abs(t);
  return 2.0 * integrator.integrate([&](double u) { return density(a + u); }, 1e-14);
}

double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double brute_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Normal sample redrawn until positive; the CV test requires positive data.
std::vector<double> positive_sample(std::mt19937_64& rng, double mean, double sd, std::size_t n) {
  std::normal_distribution<double> g(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) {
    do x = g(rng);
    while (!(x > 0.0));
  }
  return v;
}

}  // namespace

TEST(TTest, IdenticalSamples) {
  const std::vector<double> a{1.0, 2.0, 3.5, 4.0};
  const auto r = two_sample_t(a, a);
  EXPECT_EQ(r.kind, TestKind::t_pooled);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-15);
  EXPECT_EQ(r.df, 6.0);
}

TEST(TTest, ZeroVarianceConventions) {
  const auto same = two_sample_t({2.0, 2.0, 2.0}, {2.0, 2.0});
  EXPECT_EQ(same.p_value, 1.0);
  EXPECT_TRUE(same.flagged);
  const auto apart = two_sample_t({2.0, 2.0, 2.0}, {3.0, 3.0});
  EXPECT_EQ(apart.p_value, 0.0);
  EXPECT_TRUE(apart.flagged);
  EXPECT_THROW(two_sample_t({1.0}, {1.0, 2.0}), InsufficientDataError);
}

TEST(TTest, QuadratureOracleOnRandomGroups) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = normal_sample(rng, 10.0, 2.0, 5 + trial % 11);
    const auto b = normal_sample(rng, 10.0 + 0.1 * (trial % 13), 1.0 + 0.2 * (trial % 5), 4 + trial % 7);
    for (auto v : {TVariant::pooled, TVariant::welch}) {
      const auto r = two_sample_t(a, b, v);
      EXPECT_NEAR(r.p_value, t_tail_quadrature(r.statistic, r.df), 1e-9);
      EXPECT_GT(r.df, 0.0);
      EXPECT_GE(r.p_value, 0.0);
      EXPECT_LE(r.p_value, 1.0);
    }
  }
}

TEST(TTest, StatisticMatchesTextbookFormulas) {
  std::mt19937_64 rng(32);
  const auto a = normal_sample(rng, 5.0, 1.0, 9), b = normal_sample(rng, 5.5, 2.0, 14);
  const double ma = mean(a), mb = mean(b), va = std::pow(stddev_sample(a), 2), vb = std::pow(stddev_sample(b), 2);
  const double na = 9, nb = 14;
  const double sp2 = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2);
  const auto pooled = two_sample_t(a, b);
  EXPECT_NEAR(pooled.statistic, (ma - mb) / std::sqrt(sp2 * (1 / na + 1 / nb)), 1e-12);
  EXPECT_EQ(pooled.df, na + nb - 2);
  const auto welch = two_sample_t(a, b, TVariant::welch);
  const double se2 = va / na + vb / nb;
  EXPECT_NEAR(welch.statistic, (ma - mb) / std::sqrt(se2), 1e-12);
  const double df = se2 * se2 / (va * va / (na * na * (na - 1)) + vb * vb / (nb * nb * (nb - 1)));
  EXPECT_NEAR(welch.df, df, 1e-9);
  EXPECT_EQ(welch.kind, TestKind::t_welch);
}

TEST(TTest, SymmetricInGroupOrder) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = normal_sample(rng, 0.0, 1.0, 8), b = normal_sample(rng, 0.5, 1.5, 11);
    for (auto v : {TVariant::pooled, TVariant::welch}) {
      const auto ab = two_sample_t(a, b, v), ba = two_sample_t(b, a, v);
      EXPECT_DOUBLE_EQ(ab.statistic, -ba.statistic);
      EXPECT_DOUBLE_EQ(ab.p_value, ba.p_value);
    }
  }
}

TEST(TTest, SummaryStatisticGroupsFromFormationTable) {
  const auto qd_base = exact_moment_sample(2370.0, 11.0, 19, 1), qd_fast = exact_moment_sample(2362.0, 7.0, 20, 2);
  for (auto v : {TVariant::pooled, TVariant::welch}) {
    const double p = two_sample_t(qd_base, qd_fast, v).p_value;
    EXPECT_GE(p, 0.008);
    EXPECT_LE(p, 0.015);
  }
  const auto ce_a = exact_moment_sample(48.7, 1.6, 9, 3), ce_b = exact_moment_sample(43.8, 1.1, 10, 4);
  EXPECT_LT(two_sample_t(ce_a, ce_b).p_value, 1e-3);
}

TEST(TTest, RejectionRateMatchesNoncentralPower) {
  // Equal-variance groups, so the pooled statistic is exactly noncentral t.
  const double diff = 23.0, sd = 31.0;
  const int n = 10, trials = 20000;
  const double df = 2.0 * n - 2.0, delta = diff / (sd * std::sqrt(2.0 / n));
  const double crit = boost::math::quantile(boost::math::complement(boost::math::students_t(df), 0.025));
  const boost::math::non_central_t nct(df, delta);
  const double power = boost::math::cdf(boost::math::complement(nct, crit)) + boost::math::cdf(nct, -crit);
  std::mt19937_64 rng(34);
  int rejected = 0;
  for (int t = 0; t < trials; ++t) {
    rejected += two_sample_t(normal_sample(rng, 0.0, sd, n), normal_sample(rng, diff, sd, n)).p_value < 0.05;
  }
  const double rate = static_cast<double>(rejected) / trials;
  EXPECT_NEAR(rate, power, 4.0 * std::sqrt(power * (1 - power) / trials));
  // A 23 mAh offset against ~30 mAh spread is detected in under half of
  // ten-per-group fleets.
  EXPECT_LT(power, 0.5);
}

TEST(Pearson, PerfectLines) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y, z;
  for (double v : x) {
    y.push_back(2 * v + 1);
    z.push_back(-v);
  }
  EXPECT_NEAR(pearson(x, y).statistic, 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, z).statistic, -1.0, 1e-15);
  EXPECT_EQ(pearson(x, y).p_value, 0.0);
  EXPECT_THROW(pearson(x, std::vector<double>(5, 3.0)), DomainError);
  EXPECT_THROW(pearson({1, 2}, {1, 2}), InsufficientDataError);
}

TEST(Pearson, BruteForceAndTransformProperties) {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-100.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = normal_sample(rng, 0.0, 1.0, 12);
    auto y = normal_sample(rng, 0.0, 1.0, 12);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.5 * x[i];
    const auto r = pearson(x, y);
    EXPECT_NEAR(r.statistic, brute_pearson(x, y), 1e-12);
    EXPECT_EQ(r.df, 10.0);
    const double tt = r.statistic * std::sqrt(10.0 / (1.0 - r.statistic * r.statistic));
    EXPECT_NEAR(r.p_value, t_tail_quadrature(tt, 10.0), 1e-9);
    auto xa = x, yn = y;
    const double a = scale(rng), b = shift(rng);
    for (auto& v : xa) v = a * v + b;
    for (auto& v : yn) v = -v;
    EXPECT_NEAR(pearson(xa, y).statistic, r.statistic, 1e-12);
    EXPECT_NEAR(pearson(x, yn).statistic, -r.statistic, 1e-12);
  }
}

TEST(Mslr, EqualCoefficientsGiveZeroStatistic) {
  EXPECT_NEAR(cv_lrt_statistic({10, 12}, {5.0, 50.0}, {0.5, 5.0}), 0.0, 1e-9);
  const std::vector<double> g{9.0, 10.0, 11.5, 10.2, 9.7};
  const auto r = cv_equality_mslr({g, g});
  EXPECT_EQ(r.kind, TestKind::cv_mslr);
  EXPECT_EQ(r.df, 1.0);
  EXPECT_GT(r.p_value, 0.5);
}

TEST(Mslr, ScaleFreeInEachGroup) {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = normal_sample(rng, 100.0, 8.0, 10), b = normal_sample(rng, 50.0, 6.0, 12);
    auto b2 = b;
    for (auto& v : b2) v *= 7.5;
    MslrConfig cfg;
    cfg.seed = trial;
    const auto r1 = cv_equality_mslr({a, b}, cfg), r2 = cv_equality_mslr({a, b2}, cfg);
    EXPECT_NEAR(r1.statistic, r2.statistic, 1e-6);
    EXPECT_NEAR(r1.p_value, r2.p_value, 1e-6);
  }
}

TEST(Mslr, DomainChecks) {
  EXPECT_THROW(cv_equality_mslr({{1.0, 2.0, -1.0}, {1.0, 2.0, 3.0}}), DomainError);
  EXPECT_THROW(cv_equality_mslr({{1.0, 2.0}, {1.0, 2.0, 3.0}}), InsufficientDataError);
  EXPECT_THROW(cv_equality_mslr({{1.0, 2.0, 3.0}}), InsufficientDataError);
}

TEST(Mslr, CalibrationAndPowerMonteCarlo) {
  std::mt19937_64 rng(37);
  int null_rej = 0, alt_rej = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    MslrConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    const auto a = normal_sample(rng, 100.0, 10.0, 10), b = normal_sample(rng, 40.0, 4.0, 10);
    null_rej += cv_equality_mslr({a, b}, cfg).p_value < 0.05;
    const auto c = positive_sample(rng, 100.0, 5.0, 10), d = positive_sample(rng, 100.0, 25.0, 10);
    alt_rej += cv_equality_mslr({c, d}, cfg).p_value < 0.05;
  }
  EXPECT_GE(null_rej, trials * 0.02);
  EXPECT_LE(null_rej, trials * 0.08);
  EXPECT_GE(alt_rej, trials * 0.8);
}

TEST(Summary, SmallCases) {
  const auto s = summarize({1, 2, 3, 4});
  EXPECT_EQ(s.median, 2.5);
  EXPECT_EQ(s.iqr, 1.5);
  EXPECT_EQ(s.q1, 1.75);
  EXPECT_EQ(s.q3, 3.25);
  const auto one = summarize({7.0});
  EXPECT_EQ(one.iqr, 0.0);
  EXPECT_EQ(one.min, one.max);
  EXPECT_EQ(one.sd, 0.0);
  EXPECT_THROW(summarize({}), EmptyInputError);
}

TEST(Summary, BruteForceOrderStatistics) {
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = normal_sample(rng, 0.0, 1.0, 1 + trial % 23);
    const auto s = summarize(v);
    EXPECT_EQ(s.median, brute_quantile(v, 0.5));
    EXPECT_EQ(s.q1, brute_quantile(v, 0.25));
    EXPECT_EQ(s.q3, brute_quantile(v, 0.75));
    EXPECT_EQ(s.min, *std::min_element(v.begin(), v.end()));
    EXPECT_EQ(s.max, *std::max_element(v.begin(), v.end()));
    EXPECT_LE(s.min, s.median);
    EXPECT_LE(s.median, s.max);
    EXPECT_GE(s.iqr, 0.0);
    EXPECT_EQ(s.n, v.size());
  }
}

TEST(Summary, ExactMomentSample) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto v = exact_moment_sample(2370.0, 11.0, 19, seed);
    EXPECT_NEAR(mean(v), 2370.0, 1e-9);
    EXPECT_NEAR(stddev_sample(v), 11.0, 1e-9);
  }
  EXPECT_EQ(exact_moment_sample(1.0, 0.5, 5, 3), exact_moment_sample(1.0, 0.5, 5, 3));
  EXPECT_THROW(exact_moment_sample(1.0, 0.5, 1, 3), ConfigError);
}

TEST(Summary, JsonRowFields) {
  const auto j = nlohmann::json::parse(result_json_row(two_sample_t({1, 2, 3}, {2, 3, 4})));
  EXPECT_EQ(j["test_kind"], "t_pooled");
  EXPECT_TRUE(j.contains("statistic"));
  EXPECT_TRUE(j.contains("df"));
  EXPECT_TRUE(j.contains("p_value"));
}
