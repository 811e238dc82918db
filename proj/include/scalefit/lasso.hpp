#pragma once

#include <Eigen/Dense>
#include <vector>

namespace scalefit {

// Cyclic coordinate descent with soft thresholding for
//   min over (b0, b)  (1/2N) ||y - b0 - X b||^2 + reg * ||b||_1
// X columns must be standardized: mean 0 and (1/N) sum x^2 = 1, so the
// intercept stays at mean(y) and each coordinate update is closed form.

struct LassoFit {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  int sweeps = 0;
};

LassoFit lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  double reg, const Eigen::VectorXd* warm_start = nullptr,
                  double kkt_tol = 1e-9, int max_sweeps = 100000);

// Smallest penalty that zeroes every coefficient:
// max_j |(1/N) X_j^T (y - mean(y))|.
double lasso_reg_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Largest violation of the subgradient optimality conditions at (b0, b);
// zero at an exact solution.
double lasso_kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const LassoFit& fit, double reg);

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const LassoFit& fit, double reg);

// Geometric grid of `count` values from reg_max down to reg_max*10^-decades.
std::vector<double> lasso_path_grid(double reg_max, int count, double decades);

// Warm-started solutions along a decreasing penalty grid.
std::vector<LassoFit> lasso_path(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y,
                                 const std::vector<double>& grid);

}  // namespace scalefit
