#include "fbench/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "fbench/errors.hpp"
#include "fbench/numeric.hpp"

namespace fbench {

const char* to_string(TestKind k) {
  switch (k) {
    case TestKind::t_pooled: return "t_pooled";
    case TestKind::t_welch: return "t_welch";
    case TestKind::pearson: return "pearson";
    case TestKind::cv_mslr: return "cv_mslr";
  }
  return "?";
}

namespace {

double t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite sample");
  }
}

}  // namespace

StatTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b, TVariant variant) {
  if (a.size() < 2 || b.size() < 2) throw InsufficientDataError("t-test: each group needs at least 2 samples");
  require_finite(a, "t-test");
  require_finite(b, "t-test");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double va = std::pow(stddev_sample(a), 2), vb = std::pow(stddev_sample(b), 2);
  StatTestResult r;
  r.kind = variant == TVariant::pooled ? TestKind::t_pooled : TestKind::t_welch;
  double se = 0.0;
  if (variant == TVariant::pooled) {
    r.df = na + nb - 2.0;
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / r.df;
    se = std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
  } else {
    const double ua = va / na, ub = vb / nb;
    se = std::sqrt(ua + ub);
    r.df = (ua + ub) * (ua + ub) / (ua * ua / (na - 1.0) + ub * ub / (nb - 1.0));
  }
  if (se == 0.0) {
    // Both groups constant: equal means give p = 1, distinct means p = 0.
    r.flagged = true;
    if (variant == TVariant::welch) r.df = na + nb - 2.0;
    r.statistic = ma == mb ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
    r.p_value = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.statistic = (ma - mb) / se;
  r.p_value = t_two_sided(r.statistic, r.df);
  return r;
}

StatTestResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("pearson: x and y lengths differ");
  if (x.size() < 3) throw InsufficientDataError("pearson: need at least 3 pairs");
  require_finite(x, "pearson");
  require_finite(y, "pearson");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson: correlation undefined for a constant variable");
  StatTestResult r;
  r.kind = TestKind::pearson;
  r.statistic = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  r.df = static_cast<double>(x.size()) - 2.0;
  const double one_minus = 1.0 - r.statistic * r.statistic;
  r.p_value = one_minus <= 0.0 ? 0.0 : t_two_sided(r.statistic * std::sqrt(r.df / one_minus), r.df);
  return r;
}

namespace {

struct NullFit {
  double tau = 0.0;
  std::vector<double> mu;
  double loglik = 0.0;
};

// Maximizes the common-CV normal likelihood. For fixed tau the group means
// have a closed form, leaving a one-dimensional search over log tau.
NullFit fit_common_cv(const std::vector<double>& n, const std::vector<double>& m, const std::vector<double>& s) {
  const std::size_t k = n.size();
  auto mu_at = [&](double tau, std::size_t i) {
    const double t2 = tau * tau, a = std::abs(m[i]);
    return (-a + std::sqrt(a * a + 4.0 * t2 * (s[i] * s[i] + a * a))) / (2.0 * t2);
  };
  auto negll = [&](double log_tau) {
    const double tau = std::exp(log_tau);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double mu = mu_at(tau, i), a = std::abs(m[i]);
      const double d = s[i] * s[i] + (a - mu) * (a - mu);
      acc += n[i] * std::log(tau * mu) + n[i] * d / (2.0 * tau * tau * mu * mu);
    }
    return acc;
  };
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double cv = s[i] / std::abs(m[i]);
    lo = std::min(lo, cv);
    hi = std::max(hi, cv);
  }
  const auto best = boost::math::tools::brent_find_minima(negll, std::log(lo) - 1.0, std::log(hi) + 1.0, std::numeric_limits<double>::digits / 2);
  NullFit f;
  f.tau = std::exp(best.first);
  for (std::size_t i = 0; i < k; ++i) f.mu.push_back(mu_at(f.tau, i));
  f.loglik = -best.second;
  return f;
}

}  // namespace

double cv_lrt_statistic(const std::vector<double>& n, const std::vector<double>& mean,
                        const std::vector<double>& sd_mle) {
  double l1 = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(sd_mle[i] > 0.0)) throw DomainError("cv test: a group has zero variance");
    if (mean[i] == 0.0) throw DomainError("cv test: a group has zero mean");
    l1 -= n[i] * std::log(sd_mle[i]) + n[i] / 2.0;
  }
  const NullFit f = fit_common_cv(n, mean, sd_mle);
  // Both log-likelihoods omit the shared (N/2) log(2 pi) term.
  double l0 = f.loglik;
  return std::max(0.0, 2.0 * (l1 - l0));
}

StatTestResult cv_equality_mslr(const std::vector<std::vector<double>>& groups, const MslrConfig& cfg) {
  if (groups.size() < 2) throw InsufficientDataError("cv test: need at least 2 groups");
  if (cfg.simulations < 10) throw ConfigError("cv test: need at least 10 simulations");
  const std::size_t k = groups.size();
  std::vector<double> n, m, s;
  for (const auto& g : groups) {
    if (g.size() < 3) throw InsufficientDataError("cv test: each group needs at least 3 samples");
    for (double x : g) {
      if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("cv test: samples must be positive");
    }
    n.push_back(static_cast<double>(g.size()));
    m.push_back(mean(g));
    s.push_back(std::sqrt(variance_population(g)));
  }
  const double stat = cv_lrt_statistic(n, m, s);
  const NullFit null = fit_common_cv(n, m, s);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(cfg.simulations));
  std::vector<double> ms(k), ss(k);
  for (int t = 0; t < cfg.simulations; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      const double sigma = null.tau * null.mu[i];
      std::chi_squared_distribution<double> chi(n[i] - 1.0);
      ms[i] = null.mu[i] + sigma * z(rng) / std::sqrt(n[i]);
      ss[i] = sigma * std::sqrt(chi(rng) / n[i]);
    }
    draws.push_back(cv_lrt_statistic(n, ms, ss));
  }
  const double am = mean(draws), sd = stddev_sample(draws);
  const double dof = static_cast<double>(k - 1);
  StatTestResult r;
  r.kind = TestKind::cv_mslr;
  r.df = dof;
  r.statistic = sd > 0.0 ? dof + std::sqrt(2.0 * dof) * (stat - am) / sd : dof;
  boost::math::chi_squared chi(dof);
  r.p_value = r.statistic <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(chi, r.statistic));
  return r;
}

double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw EmptyInputError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

GroupSummary summarize(const std::vector<double>& group) {
  if (group.empty()) throw EmptyInputError("summarize: empty group");
  require_finite(group, "summarize");
  GroupSummary g;
  g.n = group.size();
  g.mean = mean(group);
  g.sd = group.size() > 1 ? stddev_sample(group) : 0.0;
  g.median = quantile_type7(group, 0.5);
  g.q1 = quantile_type7(group, 0.25);
  g.q3 = quantile_type7(group, 0.75);
  g.iqr = g.q3 - g.q1;
  const auto [lo, hi] = std::minmax_element(group.begin(), group.end());
  g.min = *lo;
  g.max = *hi;
  return g;
}

std::vector<double> exact_moment_sample(double mean_v, double sd, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("exact_moment_sample: need n >= 2");
  if (!(sd >= 0.0)) throw ConfigError("exact_moment_sample: sd must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  const double m = mean(v), s = stddev_sample(v);
  for (auto& x : v) x = mean_v + sd * (x - m) / s;
  return v;
}

std::string result_json_row(const StatTestResult& r) {
  nlohmann::ordered_json j;
  j["test_kind"] = to_string(r.kind);
  j["statistic"] = std::isfinite(r.statistic) ? nlohmann::ordered_json(r.statistic) : nlohmann::ordered_json(nullptr);
  j["df"] = r.df;
  j["p_value"] = r.p_value;
  j["flagged"] = r.flagged;
  return j.dump();
}

}  // namespace fbench
