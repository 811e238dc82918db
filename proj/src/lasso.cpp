#include "scalefit/lasso.hpp"

#include <cmath>

#include "scalefit/errors.hpp"

namespace scalefit {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

double lasso_reg_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd centered = y.array() - y.mean();
  return (X.transpose() * centered).cwiseAbs().maxCoeff() / n;
}

LassoFit lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  double reg, const Eigen::VectorXd* warm_start,
                  double kkt_tol, int max_sweeps) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  LassoFit fit;
  fit.intercept = y.mean();  // optimal throughout: columns have zero mean
  fit.beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);

  // Residual r = y - b0 - X b, maintained across coordinate updates and
  // refreshed periodically to shed accumulated rounding.
  Eigen::VectorXd r = y.array() - fit.intercept;
  r.noalias() -= X * fit.beta;

  const double sweep_tol = 0.1 * kkt_tol;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    if (sweep % 64 == 0) {
      r = y.array() - fit.intercept;
      r.noalias() -= X * fit.beta;
    }
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double old = fit.beta[j];
      // (1/N) X_j^T X_j = 1 under the standardization contract.
      const double z = inv_n * X.col(j).dot(r) + old;
      const double next = soft_threshold(z, reg);
      if (next != old) {
        r.noalias() -= (next - old) * X.col(j);
        fit.beta[j] = next;
        max_change = std::max(max_change, std::abs(next - old));
      }
    }
    fit.sweeps = sweep;
    if (max_change <= sweep_tol) {
      if (lasso_kkt_residual(X, y, fit, reg) <= kkt_tol) return fit;
    }
  }
  throw NonConvergenceError(
      "lasso_cd: no KKT point after " + std::to_string(max_sweeps) +
      " sweeps (residual " +
      std::to_string(lasso_kkt_residual(X, y, fit, reg)) + ")");
}

double lasso_kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const LassoFit& fit, double reg) {
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  Eigen::VectorXd r = y.array() - fit.intercept;
  r.noalias() -= X * fit.beta;
  const Eigen::VectorXd g = inv_n * (X.transpose() * r);

  double worst = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (fit.beta[j] > 0.0) {
      worst = std::max(worst, std::abs(g[j] - reg));
    } else if (fit.beta[j] < 0.0) {
      worst = std::max(worst, std::abs(g[j] + reg));
    } else {
      worst = std::max(worst, std::abs(g[j]) - reg);  // negative when interior
    }
  }
  return std::max(worst, 0.0);
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const LassoFit& fit, double reg) {
  Eigen::VectorXd r = y.array() - fit.intercept;
  r.noalias() -= X * fit.beta;
  return 0.5 * r.squaredNorm() / static_cast<double>(X.rows()) +
         reg * fit.beta.lpNorm<1>();
}

std::vector<double> lasso_path_grid(double reg_max, int count, double decades) {
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = reg_max * std::pow(10.0, -decades * i / (count - 1));
  }
  return grid;
}

std::vector<LassoFit> lasso_path(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y,
                                 const std::vector<double>& grid) {
  std::vector<LassoFit> fits;
  fits.reserve(grid.size());
  const Eigen::VectorXd* warm = nullptr;
  for (double reg : grid) {
    fits.push_back(lasso_cd(X, y, reg, warm));
    warm = &fits.back().beta;
  }
  return fits;
}

}  // namespace scalefit
