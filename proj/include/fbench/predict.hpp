#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fbench/features.hpp"

namespace fbench {

struct Dataset {
  std::vector<std::string> cell_ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd x;  ///< cells x features
  Eigen::VectorXd y;  ///< cycle life, cycles

  /// Throws ValidationError on shape mismatch, fewer than 5 cells,
  /// non-finite entries or non-positive targets.
  void validate() const;
  /// Sub-dataset with the named feature columns (ConfigError if absent).
  Dataset select(const std::vector<std::string>& names) const;
};

/// Builds a dataset from a feature table using `target` (for example
/// cycles_to_70) as the response.
Dataset dataset_from_table(const FeatureTable& table, const std::string& target);

struct RidgeModel {
  std::vector<Eigen::Index> kept;  ///< input columns used; constant columns are dropped
  Eigen::VectorXd center, scale;   ///< z-score parameters of kept columns
  Eigen::VectorXd weights;         ///< on standardized features
  double intercept = 0.0;
  std::vector<std::string> warnings;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Penalized least squares on z-scored features with an unpenalized
/// intercept.
RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha);

/// Signed mean percent error, 100/N * sum((pred - actual) / actual).
double mpe(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);
/// Mean absolute percent error, 100/N * sum(|pred - actual| / actual).
double mape(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);

enum class ModelKind { dummy, ridge };
const char* to_string(ModelKind k);

struct CvConfig {
  double validation_fraction = 0.20;
  int inner_folds = 4;
  int n_runs = 1000;
  std::vector<double> alpha_grid;  ///< empty means default_alpha_grid()
  std::uint64_t base_seed = 0;

  void validate() const;
};

/// 25 log-spaced values over [1e-6, 1e6].
std::vector<double> default_alpha_grid();

struct RunResult {
  double train_mpe = 0.0;  ///< signed, %
  double test_mpe = 0.0;   ///< signed, %, on the held-out validation share
  double train_mape = 0.0;
  double test_mape = 0.0;
  double alpha = 0.0;      ///< selected alpha; 0 for the dummy model
};

struct PredictionReport {
  ModelKind model = ModelKind::dummy;
  std::vector<std::string> features;
  CvConfig config;
  std::vector<RunResult> runs;
  /// Means and sample sds of |MPE| per run.
  double train_mpe_mean = 0.0, train_mpe_sd = 0.0;
  double test_mpe_mean = 0.0, test_mpe_sd = 0.0;
  /// Same over signed MPE.
  double train_signed_mean = 0.0, train_signed_sd = 0.0;
  double test_signed_mean = 0.0, test_signed_sd = 0.0;
  /// Same over per-run MAPE.
  double train_mape_mean = 0.0, train_mape_sd = 0.0;
  double test_mape_mean = 0.0, test_mape_sd = 0.0;
};

/// Repeated hold-out: each run (seed = base_seed + run) shuffles the cells,
/// holds out ceil(fraction * n) for scoring and fits on the rest. Ridge
/// picks alpha by inner k-fold mean squared error, then refits on the whole
/// training share; the dummy predicts the training mean.
PredictionReport nested_cv(const Dataset& data, const std::vector<std::string>& features, const CvConfig& cfg,
                           ModelKind model);

std::string report_json(const PredictionReport& r);

}  // namespace fbench
