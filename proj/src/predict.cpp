#include "fbench/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "fbench/errors.hpp"
#include "fbench/numeric.hpp"
#include "fbench/parallel.hpp"

namespace fbench {

void Dataset::validate() const {
  if (x.rows() != y.size() || static_cast<std::size_t>(x.rows()) != cell_ids.size() ||
      static_cast<std::size_t>(x.cols()) != columns.size()) {
    throw ValidationError("dataset: shape mismatch");
  }
  if (x.rows() < 5) throw ValidationError("dataset: need at least 5 cells");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("dataset: missing or non-finite values");
  if ((y.array() <= 0.0).any()) throw ValidationError("dataset: targets must be positive");
}

Dataset Dataset::select(const std::vector<std::string>& names) const {
  Dataset d;
  d.cell_ids = cell_ids;
  d.y = y;
  d.x.resize(x.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto it = std::find(columns.begin(), columns.end(), names[j]);
    if (it == columns.end()) throw ConfigError("dataset has no feature column '" + names[j] + "'");
    d.x.col(static_cast<Eigen::Index>(j)) = x.col(it - columns.begin());
  }
  d.columns = names;
  return d;
}

Dataset dataset_from_table(const FeatureTable& table, const std::string& target) {
  Dataset d;
  const auto y = table.column(target);
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    const auto& c = table.columns[j];
    if (c.rfind("cycles_to_", 0) == 0 || c.rfind("censored_", 0) == 0) continue;
    cols.push_back(j);
    d.columns.push_back(c);
  }
  d.cell_ids = table.cell_ids;
  d.x.resize(static_cast<Eigen::Index>(table.values.size()), static_cast<Eigen::Index>(cols.size()));
  d.y.resize(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < table.values.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.values[i][cols[j]];
    }
    d.y(static_cast<Eigen::Index>(i)) = y[i];
  }
  return d;
}

Eigen::VectorXd RidgeModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), intercept);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    out += weights(j) * ((x.col(kept[k]).array() - center(j)) / scale(j)).matrix();
  }
  return out;
}

RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("ridge: alpha must be a finite non-negative value");
  if (x.rows() != y.size() || x.rows() < 1) throw ValidationError("ridge: need at least 1 row matching the target");
  RidgeModel m;
  const double n = static_cast<double>(x.rows());
  std::vector<double> centers, scales;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double c = x.col(j).mean();
    const double s = std::sqrt((x.col(j).array() - c).square().sum() / n);
    if (!(s > 0.0)) {
      m.warnings.push_back("column " + std::to_string(j) + " has zero variance and was dropped");
      continue;
    }
    m.kept.push_back(j);
    centers.push_back(c);
    scales.push_back(s);
  }
  const auto p = static_cast<Eigen::Index>(m.kept.size());
  m.center = Eigen::Map<Eigen::VectorXd>(centers.data(), p);
  m.scale = Eigen::Map<Eigen::VectorXd>(scales.data(), p);
  m.intercept = y.mean();
  m.weights = Eigen::VectorXd::Zero(p);
  if (p == 0) return m;
  Eigen::MatrixXd z(x.rows(), p);
  for (Eigen::Index k = 0; k < p; ++k) z.col(k) = (x.col(m.kept[k]).array() - m.center(k)) / m.scale(k);
  const Eigen::VectorXd yc = y.array() - m.intercept;
  if (alpha > 0.0) {
    Eigen::MatrixXd a = z.transpose() * z;
    a.diagonal().array() += alpha;
    m.weights = a.ldlt().solve(z.transpose() * yc);
  } else {
    m.weights = z.completeOrthogonalDecomposition().solve(yc);
  }
  return m;
}

double mpe(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
  if (predicted.size() != actual.size() || actual.size() == 0) throw ValidationError("mpe: length mismatch or empty");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    if (actual(i) == 0.0) throw DomainError("mpe: actual value is zero");
    acc += (predicted(i) - actual(i)) / actual(i);
  }
  return acc / static_cast<double>(actual.size()) * 100.0;
}

double mape(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
  if (predicted.size() != actual.size() || actual.size() == 0) throw ValidationError("mape: length mismatch or empty");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    if (actual(i) == 0.0) throw DomainError("mape: actual value is zero");
    acc += std::abs((predicted(i) - actual(i)) / actual(i));
  }
  return acc / static_cast<double>(actual.size()) * 100.0;
}

const char* to_string(ModelKind k) { return k == ModelKind::dummy ? "dummy" : "ridge"; }

std::vector<double> default_alpha_grid() { return logspace(-6.0, 6.0, 25); }

void CvConfig::validate() const {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) throw ConfigError("validation fraction must lie in (0, 1)");
  if (inner_folds < 2) throw ConfigError("need at least 2 inner folds");
  if (n_runs < 1) throw ConfigError("need at least 1 run");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] > 0.0)) throw ConfigError("alpha grid values must be positive");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) throw ConfigError("alpha grid must ascend");
  }
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

Eigen::VectorXd rows_of(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(idx[i]);
  return out;
}

double select_alpha(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<double>& grid, int folds) {
  const auto n = static_cast<std::size_t>(x.rows());
  double best_alpha = grid.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (double alpha : grid) {
    double acc = 0.0;
    for (int f = 0; f < folds; ++f) {
      // Fold f holds rows [n f / folds, n (f + 1) / folds) of the shuffled share.
      const std::size_t lo = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(folds);
      const std::size_t hi = n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(folds);
      std::vector<Eigen::Index> tr, va;
      for (std::size_t i = 0; i < n; ++i) (i >= lo && i < hi ? va : tr).push_back(static_cast<Eigen::Index>(i));
      const RidgeModel m = ridge_fit(rows_of(x, tr), rows_of(y, tr), alpha);
      acc += (m.predict(rows_of(x, va)) - rows_of(y, va)).squaredNorm() / static_cast<double>(va.size());
    }
    const double mse = acc / folds;
    if (mse < best_mse) {
      best_mse = mse;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  return {mean(v), v.size() > 1 ? stddev_sample(v) : 0.0};
}

}  // namespace

PredictionReport nested_cv(const Dataset& data, const std::vector<std::string>& features, const CvConfig& cfg,
                           ModelKind model) {
  cfg.validate();
  data.validate();
  const Dataset d = data.select(features);
  const auto n = static_cast<std::size_t>(d.x.rows());
  const auto n_val = static_cast<std::size_t>(std::ceil(cfg.validation_fraction * static_cast<double>(n)));
  if (n_val >= n) throw ConfigError("validation share leaves no training rows");
  const std::size_t n_train = n - n_val;
  if (model == ModelKind::ridge && n_train < static_cast<std::size_t>(cfg.inner_folds)) {
    throw ConfigError("training share has too few rows for the inner folds");
  }
  const auto grid = cfg.alpha_grid.empty() ? default_alpha_grid() : cfg.alpha_grid;

  PredictionReport r;
  r.model = model;
  r.features = features;
  r.config = cfg;
  r.config.alpha_grid = grid;
  r.runs.resize(static_cast<std::size_t>(cfg.n_runs));
  parallel_for(r.runs.size(), [&](std::size_t run) {
    std::mt19937_64 rng(cfg.base_seed + run);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    const std::vector<Eigen::Index> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    const std::vector<Eigen::Index> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    const Eigen::MatrixXd xt = rows_of(d.x, tr), xv = rows_of(d.x, val);
    const Eigen::VectorXd yt = rows_of(d.y, tr), yv = rows_of(d.y, val);
    RunResult res;
    if (model == ModelKind::dummy) {
      const Eigen::VectorXd pt = Eigen::VectorXd::Constant(yt.size(), yt.mean());
      const Eigen::VectorXd pv = Eigen::VectorXd::Constant(yv.size(), yt.mean());
      res.train_mpe = mpe(pt, yt);
      res.test_mpe = mpe(pv, yv);
      res.train_mape = mape(pt, yt);
      res.test_mape = mape(pv, yv);
    } else {
      res.alpha = select_alpha(xt, yt, grid, cfg.inner_folds);
      const RidgeModel m = ridge_fit(xt, yt, res.alpha);
      const Eigen::VectorXd pt = m.predict(xt), pv = m.predict(xv);
      res.train_mpe = mpe(pt, yt);
      res.test_mpe = mpe(pv, yv);
      res.train_mape = mape(pt, yt);
      res.test_mape = mape(pv, yv);
    }
    r.runs[run] = res;
  });

  std::vector<double> tr_abs, te_abs, tr_s, te_s, tr_m, te_m;
  for (const auto& run : r.runs) {
    tr_m.push_back(run.train_mape);
    te_m.push_back(run.test_mape);
    tr_abs.push_back(std::abs(run.train_mpe));
    te_abs.push_back(std::abs(run.test_mpe));
    tr_s.push_back(run.train_mpe);
    te_s.push_back(run.test_mpe);
  }
  std::tie(r.train_mpe_mean, r.train_mpe_sd) = mean_sd(tr_abs);
  std::tie(r.test_mpe_mean, r.test_mpe_sd) = mean_sd(te_abs);
  std::tie(r.train_signed_mean, r.train_signed_sd) = mean_sd(tr_s);
  std::tie(r.test_signed_mean, r.test_signed_sd) = mean_sd(te_s);
  std::tie(r.train_mape_mean, r.train_mape_sd) = mean_sd(tr_m);
  std::tie(r.test_mape_mean, r.test_mape_sd) = mean_sd(te_m);
  return r;
}

std::string report_json(const PredictionReport& r) {
  nlohmann::ordered_json j;
  j["model"] = to_string(r.model);
  j["features"] = r.features;
  j["config"] = {{"validation_fraction", r.config.validation_fraction},
                 {"inner_folds", r.config.inner_folds},
                 {"n_runs", r.config.n_runs},
                 {"alpha_grid", r.config.alpha_grid},
                 {"base_seed", r.config.base_seed}};
  j["aggregate"] = {{"train_mpe_mean", r.train_mpe_mean},       {"train_mpe_sd", r.train_mpe_sd},
                    {"test_mpe_mean", r.test_mpe_mean},         {"test_mpe_sd", r.test_mpe_sd},
                    {"train_signed_mpe_mean", r.train_signed_mean}, {"train_signed_mpe_sd", r.train_signed_sd},
                    {"test_signed_mpe_mean", r.test_signed_mean},   {"test_signed_mpe_sd", r.test_signed_sd},
                    {"train_mape_mean", r.train_mape_mean},         {"train_mape_sd", r.train_mape_sd},
                    {"test_mape_mean", r.test_mape_mean},           {"test_mape_sd", r.test_mape_sd}};
  auto& runs = j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"train_mpe", run.train_mpe},
                    {"test_mpe", run.test_mpe},
                    {"train_mape", run.train_mape},
                    {"test_mape", run.test_mape},
                    {"alpha", run.alpha}});
  }
  return j.dump(2) + "\n";
}

}  // namespace fbench
