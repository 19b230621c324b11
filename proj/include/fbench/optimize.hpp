#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fbench {

struct SimplexConfig {
  int max_iter = 2000;
  /// Converged once max - min objective over the simplex falls below this.
  double f_tol = 1e-9;
  /// Initial simplex edge in unit-box coordinates.
  double initial_step = 0.15;
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead over the unit box [0,1]^d. Trial points are projected onto
/// the box, so every objective evaluation is at a feasible point.
SimplexResult nelder_mead_unit_box(const std::function<double(const std::vector<double>&)>& f,
                                   std::vector<double> x0, const SimplexConfig& cfg);

/// n Latin-hypercube points in [0,1]^d: each axis is split into n strata
/// and every stratum holds exactly one point.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t d, std::mt19937_64& rng);

}  // namespace fbench
