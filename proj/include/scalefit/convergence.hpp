#pragma once

#include <string>
#include <vector>

#include "scalefit/bsp.hpp"

namespace scalefit {

// Fixed, versioned feature set for the log-suboptimality model
//   ln(P(i,m) - P*) ~ b0 + sum_j coeff_j * phi_j(i, m).
// The i/m feature is the load-bearing one: a geometric decay whose rate
// degrades linearly with m is exactly linear in i/m after the log.
struct FeatureBasis {
  std::string version;
  std::vector<std::string> names;

  int size() const { return static_cast<int>(names.size()); }
};

const FeatureBasis& default_basis();  // "v1", 10 penalized features

double basis_feature(const FeatureBasis& basis, int j, double i, double m);

// Column indices in the order they may be sacrificed when a window is too
// small to support the full basis: interaction terms first, plain i last.
const std::vector<int>& drop_priority(const FeatureBasis& basis);

struct TrainingRow {
  double i;
  double m;
  double y;  // ln(P - p_star)
};

struct TrainingSet {
  std::vector<TrainingRow> rows;
  int dropped_rows = 0;  // records at or below the resolution floor
  double p_star = 0.0;
  double p_star_gap = 0.0;
  std::string algorithm;
  std::string dataset_hash;
};

// Rows from iteration >= 1 records with y = ln(P - p_star); records whose
// suboptimality is at or below max(p_star_gap, 1e-12) are dropped and
// counted rather than floored.
TrainingSet build_training_set(const std::vector<Trace>& traces,
                               double p_star, double p_star_gap);

struct ConvergenceModel {
  std::string basis_version;
  std::vector<double> coeffs;      // per basis feature, standardized space
  double intercept = 0.0;
  std::vector<double> feat_mean;   // standardization, per basis feature
  std::vector<double> feat_scale;  // 0 marks a dropped column
  std::vector<int> dropped_columns;
  double p_star = 0.0;
  double p_star_gap = 0.0;
  double chosen_reg = 0.0;
  std::string algorithm;
  std::string dataset_hash;
  std::vector<std::string> warnings;

  int support_size() const;
};

// Lasso over the standardized basis with warm-started path fits and
// k-fold cross validation (folds grouped by m when enough distinct m
// values exist, contiguous row blocks otherwise). The path runs from
// reg_max down four decades and keeps extending while the CV optimum
// sits on its lower edge, so noiseless planted data is fit to machine
// precision instead of being stopped at an arbitrary penalty floor.
ConvergenceModel fit_convergence(const TrainingSet& training,
                                 const FeatureBasis& basis, int folds);

// Ridge-stabilized least squares (reg ~ 0) on the reduced basis: drops
// zero-variance columns, then priority-order features until the design
// has full numerical rank. Used for scarce-row window fits.
ConvergenceModel fit_ols_reduced(const TrainingSet& training,
                                 const FeatureBasis& basis);

double predict_log_g(const ConvergenceModel& model, double i, double m);
double predict_g(const ConvergenceModel& model, double i, int m);

void save_convergence_model(const ConvergenceModel& model,
                            const std::string& path);
ConvergenceModel load_convergence_model(const std::string& path);

}  // namespace scalefit
