#include "fbench/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fbench/errors.hpp"

namespace fbench {

namespace {

// Three-point end slope with the PCHIP sign/magnitude guards.
double end_slope(double h0, double h1, double m0, double m1) {
  double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if (std::signbit(d) != std::signbit(m0)) {
    d = 0.0;
  } else if (std::signbit(m0) != std::signbit(m1) && std::abs(d) > std::abs(3.0 * m0)) {
    d = 3.0 * m0;
  }
  return d;
}

}  // namespace

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) throw ConfigError("interpolant: knot/value size mismatch");
  if (x_.size() < 2) throw InsufficientDataError("interpolant: need at least 2 knots");
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) throw ConfigError("interpolant: knots must be strictly ascending");
  }
  const std::size_t n = x_.size();
  d_.assign(n, 0.0);
  std::vector<double> h(n - 1), m(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    m[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  if (n == 2) {
    d_[0] = d_[1] = m[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (m[k - 1] == 0.0 || m[k] == 0.0 || std::signbit(m[k - 1]) != std::signbit(m[k])) {
      d_[k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
    }
  }
  d_[0] = end_slope(h[0], h[1], m[0], m[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
}

std::size_t MonotoneCubic::interval(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
  if (x_.empty()) throw InsufficientDataError("interpolant is empty");
  if (x < x_.front() || x > x_.back()) {
    throw ExtrapolationError("interpolant: query outside knot span");
  }
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::clamp_eval(double x, bool& clamped) const {
  if (x < x_.front()) {
    clamped = true;
    return y_.front();
  }
  if (x > x_.back()) {
    clamped = true;
    return y_.back();
  }
  return (*this)(x);
}

double MonotoneCubic::derivative(double x) const {
  x = std::clamp(x, x_.front(), x_.back());
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double dh00 = (6 * t2 - 6 * t) / h;
  const double dh10 = 3 * t2 - 4 * t + 1;
  const double dh01 = (-6 * t2 + 6 * t) / h;
  const double dh11 = 3 * t2 - 2 * t;
  return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

double linear_interp(std::span<const double> x, std::span<const double> y, double at) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("linear_interp: bad knots");
  if (at < x.front() || at > x.back()) throw ExtrapolationError("linear_interp: outside span");
  auto it = std::upper_bound(x.begin(), x.end(), at);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  i = std::min(i, x.size() - 2);
  const double t = (at - x[i]) / (x[i + 1] - x[i]);
  return y[i] + t * (y[i + 1] - y[i]);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  if (n > 0) out.back() = hi;
  return out;
}

std::vector<double> logspace(double lo_exp10, double hi_exp10, std::size_t n) {
  auto e = linspace(lo_exp10, hi_exp10, n);
  for (auto& v : e) v = std::pow(10.0, v);
  return e;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
              double f_tol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) {
    throw DomainError("bisect: endpoints do not bracket a root");
  }
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0 || std::abs(fm) < f_tol) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo < x_tol) break;
  }
  return 0.5 * (lo + hi);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("trapezoid: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return acc;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw EmptyInputError("mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_population(std::span<const double> v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

double stddev_sample(std::span<const double> v) {
  if (v.size() < 2) throw InsufficientDataError("sample sd needs n >= 2");
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace fbench
