#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fbench {

/// Shape-preserving monotone piecewise-cubic Hermite interpolant
/// (Fritsch-Carlson slopes, same end conditions as PCHIP).
///
/// Knots must be strictly ascending. The interpolant never overshoots the
/// data: on every interval the result lies between the two knot values.
/// Evaluation outside [front, back] is an error unless clamp() is used.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  /// Evaluates at x clamped into the knot span; sets `clamped` when it had to.
  double clamp_eval(double x, bool& clamped) const;
  double derivative(double x) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  bool empty() const { return x_.empty(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::size_t interval(double x) const;

  std::vector<double> x_, y_, d_;
};

/// Piecewise-linear interpolation over strictly ascending knots.
double linear_interp(std::span<const double> x, std::span<const double> y, double at);

std::vector<double> linspace(double lo, double hi, std::size_t n);
std::vector<double> logspace(double lo_exp10, double hi_exp10, std::size_t n);

/// Root of f on [lo, hi] by bisection. f(lo) and f(hi) must bracket zero.
/// Stops when the bracket is narrower than x_tol or |f| < f_tol.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_tol = 1e-13, double f_tol = 0.0, int max_iter = 200);

/// Trapezoidal integral of y over x.
double trapezoid(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Population variance (divisor n).
double variance_population(std::span<const double> v);
/// Sample standard deviation (divisor n - 1).
double stddev_sample(std::span<const double> v);

}  // namespace fbench
