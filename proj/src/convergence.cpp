#include "scalefit/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "scalefit/kv_io.hpp"
#include "scalefit/lasso.hpp"

namespace scalefit {

const FeatureBasis& default_basis() {
  static const FeatureBasis basis{
      "v1",
      {"i", "i/m", "i/sqrt(m)", "sqrt(i)", "log1p(i)", "log1p(i)/m", "m",
       "log1p(m)", "1/m", "i/m^2"}};
  return basis;
}

double basis_feature(const FeatureBasis& basis, int j, double i, double m) {
  if (basis.version != "v1") {
    throw Error("unknown basis version '" + basis.version + "'");
  }
  switch (j) {
    case 0: return i;
    case 1: return i / m;
    case 2: return i / std::sqrt(m);
    case 3: return std::sqrt(i);
    case 4: return std::log1p(i);
    case 5: return std::log1p(i) / m;
    case 6: return m;
    case 7: return std::log1p(m);
    case 8: return 1.0 / m;
    case 9: return i / (m * m);
  }
  throw Error("basis feature index out of range");
}

const std::vector<int>& drop_priority(const FeatureBasis& basis) {
  if (basis.version != "v1") {
    throw Error("unknown basis version '" + basis.version + "'");
  }
  // i/m^2, log1p(i)/m, i/sqrt(m), i/m, 1/m, log1p(m), m, log1p(i), sqrt(i), i
  static const std::vector<int> order = {9, 5, 2, 1, 8, 7, 6, 4, 3, 0};
  return order;
}

TrainingSet build_training_set(const std::vector<Trace>& traces,
                               double p_star, double p_star_gap) {
  if (traces.empty()) throw InsufficientDataError("no traces supplied");
  if (p_star_gap < 0) throw Error("p_star_gap must be >= 0");

  TrainingSet ts;
  ts.p_star = p_star;
  ts.p_star_gap = p_star_gap;
  ts.algorithm = traces.front().meta.algorithm;
  ts.dataset_hash = traces.front().meta.dataset_hash;

  double min_primal = std::numeric_limits<double>::infinity();
  for (const auto& trace : traces) {
    if (trace.meta.algorithm != ts.algorithm ||
        trace.meta.dataset_hash != ts.dataset_hash) {
      throw Error("build_training_set: traces mix algorithms or datasets");
    }
    for (const auto& r : trace.records) min_primal = std::min(min_primal, r.primal);
  }
  if (p_star > min_primal + p_star_gap) {
    throw Error("build_training_set: p_star exceeds the best recorded primal "
                "by more than its certified gap");
  }

  const double floor = std::max(p_star_gap, 1e-12);
  for (const auto& trace : traces) {
    for (const auto& r : trace.records) {
      if (r.iteration < 1) continue;  // iteration 0 is the initial point
      const double diff = r.primal - p_star;
      if (diff <= floor) {
        ++ts.dropped_rows;
        continue;
      }
      ts.rows.push_back({static_cast<double>(r.iteration),
                         static_cast<double>(trace.meta.m), std::log(diff)});
    }
  }
  if (ts.rows.empty()) {
    throw InsufficientDataError(
        "build_training_set: every record fell at or below the resolution "
        "floor");
  }
  return ts;
}

int ConvergenceModel::support_size() const {
  int nz = 0;
  for (double c : coeffs) nz += c != 0.0;
  return nz;
}

namespace {

struct Standardized {
  Eigen::MatrixXd X;           // standardized kept columns
  std::vector<int> kept;       // basis indices of the columns of X
  std::vector<double> mean;    // per basis feature
  std::vector<double> scale;   // per basis feature; 0 where dropped
};

Eigen::MatrixXd raw_features(const TrainingSet& ts, const FeatureBasis& basis,
                             const std::vector<int>& row_ids) {
  Eigen::MatrixXd F(row_ids.size(), basis.size());
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    const auto& row = ts.rows[row_ids[r]];
    for (int j = 0; j < basis.size(); ++j) {
      F(r, j) = basis_feature(basis, j, row.i, row.m);
    }
  }
  return F;
}

// Population standardization; columns with (numerically) zero variance are
// dropped rather than inflated.
Standardized standardize(const Eigen::MatrixXd& F) {
  const auto n = F.rows();
  Standardized s;
  s.mean.resize(F.cols());
  s.scale.assign(F.cols(), 0.0);
  for (Eigen::Index j = 0; j < F.cols(); ++j) {
    const double mu = F.col(j).mean();
    const double var = (F.col(j).array() - mu).square().sum() / n;
    const double sd = std::sqrt(var);
    s.mean[j] = mu;
    if (sd > 1e-10 * (1.0 + std::abs(mu))) {
      s.scale[j] = sd;
      s.kept.push_back(static_cast<int>(j));
    }
  }
  s.X.resize(n, s.kept.size());
  for (std::size_t c = 0; c < s.kept.size(); ++c) {
    const int j = s.kept[c];
    s.X.col(c) = (F.col(j).array() - s.mean[j]) / s.scale[j];
  }
  return s;
}

// Deterministic fold labels: group by m value when there are enough
// distinct m's, otherwise contiguous row blocks.
std::vector<int> fold_labels(const TrainingSet& ts, int folds) {
  std::set<double> distinct;
  for (const auto& row : ts.rows) distinct.insert(row.m);
  std::vector<int> labels(ts.rows.size());
  if (static_cast<int>(distinct.size()) >= folds) {
    std::map<double, int> fold_of;
    int idx = 0;
    for (double m : distinct) fold_of[m] = idx++ % folds;
    for (std::size_t r = 0; r < ts.rows.size(); ++r) {
      labels[r] = fold_of[ts.rows[r].m];
    }
  } else {
    const std::size_t n = ts.rows.size();
    for (std::size_t r = 0; r < n; ++r) {
      labels[r] = static_cast<int>(r * folds / n);
    }
  }
  return labels;
}

ConvergenceModel model_shell(const TrainingSet& ts, const FeatureBasis& basis) {
  ConvergenceModel model;
  model.basis_version = basis.version;
  model.coeffs.assign(basis.size(), 0.0);
  model.feat_mean.assign(basis.size(), 0.0);
  model.feat_scale.assign(basis.size(), 0.0);
  model.p_star = ts.p_star;
  model.p_star_gap = ts.p_star_gap;
  model.algorithm = ts.algorithm;
  model.dataset_hash = ts.dataset_hash;
  return model;
}

void fill_model(ConvergenceModel& model, const Standardized& s,
                const Eigen::VectorXd& beta, double intercept,
                const FeatureBasis& basis) {
  model.intercept = intercept;
  for (std::size_t c = 0; c < s.kept.size(); ++c) {
    model.coeffs[s.kept[c]] = beta[c];
  }
  for (int j = 0; j < basis.size(); ++j) {
    model.feat_mean[j] = s.mean[j];
    model.feat_scale[j] = s.scale[j];
    if (s.scale[j] == 0.0) model.dropped_columns.push_back(j);
  }
}

}  // namespace

ConvergenceModel fit_convergence(const TrainingSet& training,
                                 const FeatureBasis& basis, int folds) {
  const int n_rows = static_cast<int>(training.rows.size());
  if (folds < 2) throw Error("fit_convergence: folds must be >= 2");
  if (n_rows < folds) {
    throw InsufficientDataError("fit_convergence: fewer rows than folds");
  }

  std::vector<int> all_rows(n_rows);
  for (int r = 0; r < n_rows; ++r) all_rows[r] = r;
  const Eigen::MatrixXd F_full = raw_features(training, basis, all_rows);
  Eigen::VectorXd y_full(n_rows);
  for (int r = 0; r < n_rows; ++r) y_full[r] = training.rows[r].y;

  const Standardized full = standardize(F_full);
  if (full.kept.empty()) {
    throw InsufficientDataError("fit_convergence: every column is constant");
  }

  const double reg_max = lasso_reg_max(full.X, y_full);
  ConvergenceModel model = model_shell(training, basis);

  if (reg_max <= 0.0) {
    // y is constant: the intercept-only model is exact.
    fill_model(model, full, Eigen::VectorXd::Zero(full.X.cols()),
               y_full.mean(), basis);
    model.chosen_reg = 0.0;
    return model;
  }

  // Penalty grid: reg_max * 10^(-4*k/99). Extended below while the CV
  // minimum sits at the smallest value, floored at reg_max * 1e-12.
  const auto grid_value = [&](int k) {
    return reg_max * std::pow(10.0, -4.0 * k / 99.0);
  };
  int grid_size = 100;

  const std::vector<int> labels = fold_labels(training, folds);

  struct Fold {
    std::vector<int> train_rows, test_rows;
    Standardized std;
    Eigen::VectorXd y_train;
    Eigen::VectorXd beta;  // warm start carried along the path
    double intercept = 0.0;
  };
  std::vector<Fold> fold_data(folds);
  for (int r = 0; r < n_rows; ++r) {
    for (int f = 0; f < folds; ++f) {
      (labels[r] == f ? fold_data[f].test_rows : fold_data[f].train_rows)
          .push_back(r);
    }
  }
  for (auto& fold : fold_data) {
    if (fold.train_rows.empty() || fold.test_rows.empty()) {
      throw InsufficientDataError("fit_convergence: empty cross-validation "
                                  "fold");
    }
    fold.std = standardize(raw_features(training, basis, fold.train_rows));
    fold.y_train.resize(fold.train_rows.size());
    for (std::size_t r = 0; r < fold.train_rows.size(); ++r) {
      fold.y_train[r] = training.rows[fold.train_rows[r]].y;
    }
    fold.beta = Eigen::VectorXd::Zero(fold.std.X.cols());
  }

  const auto fold_mse = [&](Fold& fold, double reg) {
    const LassoFit fit = lasso_cd(fold.std.X, fold.y_train, reg, &fold.beta);
    fold.beta = fit.beta;
    fold.intercept = fit.intercept;
    double sq = 0.0;
    for (int row_id : fold.test_rows) {
      double pred = fit.intercept;
      for (std::size_t c = 0; c < fold.std.kept.size(); ++c) {
        const int j = fold.std.kept[c];
        const double phi =
            basis_feature(basis, j, training.rows[row_id].i,
                          training.rows[row_id].m);
        pred += fit.beta[c] * (phi - fold.std.mean[j]) / fold.std.scale[j];
      }
      const double err = pred - training.rows[row_id].y;
      sq += err * err;
    }
    return sq / fold.test_rows.size();
  };

  std::vector<double> cv_mse;
  cv_mse.reserve(grid_size);
  int evaluated = 0;
  int best_idx = 0;
  const double reg_floor = reg_max * 1e-12;
  while (true) {
    for (; evaluated < grid_size; ++evaluated) {
      const double reg = grid_value(evaluated);
      double total = 0.0;
      for (auto& fold : fold_data) total += fold_mse(fold, reg);
      cv_mse.push_back(total / folds);
      if (cv_mse[evaluated] < cv_mse[best_idx]) best_idx = evaluated;
    }
    const bool at_edge = best_idx == grid_size - 1;
    if (!at_edge || grid_value(grid_size) < reg_floor) break;
    grid_size += 25;
  }

  model.chosen_reg = grid_value(best_idx);

  const LassoFit final_fit = lasso_cd(full.X, y_full, model.chosen_reg);
  fill_model(model, full, final_fit.beta, final_fit.intercept, basis);
  for (int j : model.dropped_columns) {
    model.warnings.push_back("dropped zero-variance column " + basis.names[j]);
  }
  if (best_idx >= 100) {
    model.warnings.push_back("cv extended the penalty grid below reg_max*1e-4");
  }
  return model;
}

ConvergenceModel fit_ols_reduced(const TrainingSet& training,
                                 const FeatureBasis& basis) {
  const int n_rows = static_cast<int>(training.rows.size());
  if (n_rows < 2) {
    throw InsufficientDataError("fit_ols_reduced: need at least 2 rows");
  }
  std::vector<int> all_rows(n_rows);
  for (int r = 0; r < n_rows; ++r) all_rows[r] = r;
  const Eigen::MatrixXd F = raw_features(training, basis, all_rows);
  Eigen::VectorXd y(n_rows);
  for (int r = 0; r < n_rows; ++r) y[r] = training.rows[r].y;

  Standardized s = standardize(F);
  ConvergenceModel model = model_shell(training, basis);

  // Reduce until the standardized design has full numerical rank and no
  // more columns than rows.
  const auto rank_of = [](const Eigen::MatrixXd& X) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-8);
    return static_cast<int>(qr.rank());
  };
  for (int victim : drop_priority(basis)) {
    if (s.kept.empty()) break;
    const bool too_wide = static_cast<int>(s.kept.size()) >= n_rows;
    if (!too_wide && rank_of(s.X) == static_cast<int>(s.kept.size())) break;
    auto it = std::find(s.kept.begin(), s.kept.end(), victim);
    if (it == s.kept.end()) continue;
    const auto col = std::distance(s.kept.begin(), it);
    s.kept.erase(it);
    s.scale[victim] = 0.0;
    Eigen::MatrixXd reduced(s.X.rows(), s.X.cols() - 1);
    reduced << s.X.leftCols(col), s.X.rightCols(s.X.cols() - col - 1);
    s.X = std::move(reduced);
    model.warnings.push_back("reduced basis: dropped " + basis.names[victim]);
  }

  const double intercept = y.mean();
  Eigen::VectorXd beta;
  if (s.kept.empty()) {
    beta = Eigen::VectorXd::Zero(0);
  } else {
    const Eigen::VectorXd centered = y.array() - intercept;
    Eigen::MatrixXd gram = s.X.transpose() * s.X / double(n_rows);
    gram.diagonal().array() += 1e-10;  // ridge stabilizer
    beta = gram.ldlt().solve(s.X.transpose() * centered / double(n_rows));
  }
  fill_model(model, s, beta, intercept, basis);
  model.chosen_reg = 0.0;
  return model;
}

double predict_log_g(const ConvergenceModel& model, double i, double m) {
  if (i < 1.0 || m < 1.0) {
    throw Error("predict_g domain: requires i >= 1 and m >= 1");
  }
  const FeatureBasis& basis = default_basis();
  if (model.basis_version != basis.version) {
    throw InvalidModelError("model basis '" + model.basis_version +
                            "' is not supported");
  }
  double log_g = model.intercept;
  for (int j = 0; j < basis.size(); ++j) {
    if (model.feat_scale[j] == 0.0 || model.coeffs[j] == 0.0) continue;
    const double phi = basis_feature(basis, j, i, m);
    log_g += model.coeffs[j] * (phi - model.feat_mean[j]) / model.feat_scale[j];
  }
  return log_g;
}

double predict_g(const ConvergenceModel& model, double i, int m) {
  return std::exp(predict_log_g(model, i, static_cast<double>(m)));
}

void save_convergence_model(const ConvergenceModel& model,
                            const std::string& path) {
  const FeatureBasis& basis = default_basis();
  KvMap kv;
  kv["basis"] = model.basis_version;
  kv["intercept"] = format_double(model.intercept);
  kv["chosen_reg"] = format_double(model.chosen_reg);
  kv["p_star"] = format_double(model.p_star);
  kv["p_star_gap"] = format_double(model.p_star_gap);
  if (!model.algorithm.empty()) kv["algorithm"] = model.algorithm;
  if (!model.dataset_hash.empty()) kv["dataset_hash"] = model.dataset_hash;
  for (int j = 0; j < basis.size(); ++j) {
    if (model.coeffs[j] != 0.0) {
      kv["coeff." + basis.names[j]] = format_double(model.coeffs[j]);
    }
    if (model.feat_scale[j] != 0.0) {
      kv["mean." + basis.names[j]] = format_double(model.feat_mean[j]);
      kv["scale." + basis.names[j]] = format_double(model.feat_scale[j]);
    }
  }
  for (std::size_t w = 0; w < model.warnings.size(); ++w) {
    kv["warning." + std::to_string(w)] = model.warnings[w];
  }
  write_kv_file(path, kv);
}

ConvergenceModel load_convergence_model(const std::string& path) {
  const KvMap kv = read_kv_file(path);
  const FeatureBasis& basis = default_basis();
  ConvergenceModel model;
  model.basis_version = kv_require(kv, "basis", path);
  if (model.basis_version != basis.version) {
    throw SchemaError(path + ": unsupported basis '" + model.basis_version +
                      "'");
  }
  model.coeffs.assign(basis.size(), 0.0);
  model.feat_mean.assign(basis.size(), 0.0);
  model.feat_scale.assign(basis.size(), 0.0);
  model.intercept = parse_double(kv_require(kv, "intercept", path));
  model.chosen_reg = parse_double(kv_require(kv, "chosen_reg", path));
  model.p_star = parse_double(kv_require(kv, "p_star", path));
  model.p_star_gap = parse_double(kv_require(kv, "p_star_gap", path));
  model.algorithm = kv_get(kv, "algorithm").value_or("");
  model.dataset_hash = kv_get(kv, "dataset_hash").value_or("");
  for (int j = 0; j < basis.size(); ++j) {
    if (auto v = kv_get(kv, "coeff." + basis.names[j])) {
      model.coeffs[j] = parse_double(*v);
    }
    if (auto v = kv_get(kv, "scale." + basis.names[j])) {
      model.feat_scale[j] = parse_double(*v);
      model.feat_mean[j] =
          parse_double(kv_require(kv, "mean." + basis.names[j], path));
    } else {
      model.dropped_columns.push_back(j);
    }
  }
  for (std::size_t w = 0;; ++w) {
    auto v = kv_get(kv, "warning." + std::to_string(w));
    if (!v) break;
    model.warnings.push_back(*v);
  }
  return model;
}

}  // namespace scalefit
