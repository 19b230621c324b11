#include "fbench/optimize.hpp"

#include <algorithm>
#include <numeric>

#include "fbench/errors.hpp"

namespace fbench {

namespace {

void project(std::vector<double>& x) {
  for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

SimplexResult nelder_mead_unit_box(const std::function<double(const std::vector<double>&)>& f,
                                   std::vector<double> x0, const SimplexConfig& cfg) {
  const std::size_t d = x0.size();
  if (d == 0) throw ConfigError("simplex: zero-dimensional problem");
  project(x0);

  std::vector<std::vector<double>> pts(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) {
    // Step away from the nearer wall so the initial simplex is never flat.
    pts[i + 1][i] += x0[i] + cfg.initial_step <= 1.0 ? cfg.initial_step : -cfg.initial_step;
    project(pts[i + 1]);
  }
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = f(pts[i]);

  std::vector<std::size_t> order(d + 1);
  SimplexResult res;
  for (int it = 0; it < cfg.max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
    res.iterations = it;
    if (fv[worst] - fv[best] < cfg.f_tol) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t i = order[k];
      for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[i][j] / static_cast<double>(d);
    }
    auto along = [&](double t) {
      std::vector<double> p(d);
      for (std::size_t j = 0; j < d; ++j) p[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
      project(p);
      return p;
    };

    auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = std::move(xr);
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : fv[worst])) {
      pts[worst] = std::move(xc);
      fv[worst] = fc;
      continue;
    }
    for (std::size_t k = 1; k <= d; ++k) {
      const std::size_t i = order[k];
      for (std::size_t j = 0; j < d; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
      fv[i] = f(pts[i]);
    }
  }
  const auto b = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = pts[b];
  res.f = fv[b];
  if (!res.converged) res.iterations = cfg.max_iter;
  return res;
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      pts[i][j] = (static_cast<double>(perm[i]) + u(rng)) / static_cast<double>(n);
    }
  }
  return pts;
}

}  // namespace fbench
