#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fbench {

enum class TestKind { t_pooled, t_welch, pearson, cv_mslr };
const char* to_string(TestKind k);

struct StatTestResult {
  TestKind kind = TestKind::t_pooled;
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  /// Set when a degenerate-input convention decided the result.
  bool flagged = false;
};

enum class TVariant { pooled, welch };

/// Two-sided two-sample t-test. Each group needs n >= 2.
StatTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b,
                            TVariant variant = TVariant::pooled);

/// Pearson correlation with a two-sided p from the t transform. Needs
/// n >= 3 and non-zero variance in both variables.
StatTestResult pearson(const std::vector<double>& x, const std::vector<double>& y);

struct MslrConfig {
  int simulations = 1000;  ///< parametric bootstrap draws for the moment correction
  std::uint64_t seed = 0;
};

/// Likelihood ratio statistic for equal coefficients of variation
/// across normal groups, before the moment correction.
double cv_lrt_statistic(const std::vector<double>& n, const std::vector<double>& mean,
                        const std::vector<double>& sd_mle);

/// Modified likelihood ratio test for equal coefficients of variation. The
/// raw statistic is standardized to chi-square(k - 1) mean and variance
/// using draws of the sufficient statistics under the fitted null.
StatTestResult cv_equality_mslr(const std::vector<std::vector<double>>& groups, const MslrConfig& cfg = {});

struct GroupSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  ///< sample sd, 0 for n = 1
  double median = 0.0;
  double q1 = 0.0, q3 = 0.0;
  double iqr = 0.0;
  double min = 0.0, max = 0.0;
};

/// Quartiles interpolate linearly between order statistics (type 7).
GroupSummary summarize(const std::vector<double>& group);
double quantile_type7(std::vector<double> v, double p);

/// n values with exactly the given mean and sample sd, shaped by seeded
/// normal draws.
std::vector<double> exact_moment_sample(double mean, double sd, std::size_t n, std::uint64_t seed);

std::string result_json_row(const StatTestResult& r);

}  // namespace fbench
