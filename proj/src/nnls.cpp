#include "scalefit/nnls.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "scalefit/errors.hpp"

namespace scalefit {

namespace {

// Least squares on the passive columns. Reports rank deficiency through
// `deficient`; the solution is minimum-norm in that case.
Eigen::VectorXd solve_passive(const Eigen::MatrixXd& A,
                              const Eigen::VectorXd& b,
                              const std::vector<int>& passive,
                              bool* deficient) {
  Eigen::MatrixXd Ap(A.rows(), passive.size());
  for (std::size_t c = 0; c < passive.size(); ++c) Ap.col(c) = A.col(passive[c]);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Ap);
  cod.setThreshold(1e-10);
  if (cod.rank() < static_cast<Eigen::Index>(passive.size())) *deficient = true;
  return cod.solve(b);
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int p = static_cast<int>(A.cols());

  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(p);
  res.rank_deficient = false;
  res.outer_iterations = 0;

  std::vector<bool> passive(p, false);
  std::vector<int> passive_idx;

  const double grad_scale = (A.transpose() * b).cwiseAbs().maxCoeff();
  const double tol = 1e-11 * std::max(1.0, grad_scale);

  const int max_outer = 3 * p + 30;
  int inner_guard = 0;

  while (res.outer_iterations < max_outer) {
    Eigen::VectorXd w = A.transpose() * (b - A * res.x);

    int best = -1;
    double best_w = tol;
    for (int j = 0; j < p; ++j) {
      if (!passive[j] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;  // KKT satisfied on the zero set

    passive[best] = true;
    passive_idx.push_back(best);
    ++res.outer_iterations;

    while (true) {
      if (++inner_guard > 30 * (p + 1) * max_outer) {
        throw NonConvergenceError("nnls: inner loop failed to terminate");
      }
      Eigen::VectorXd z =
          solve_passive(A, b, passive_idx, &res.rank_deficient);

      bool all_positive = true;
      for (Eigen::Index c = 0; c < z.size(); ++c) {
        if (z[c] <= 0.0) {
          all_positive = false;
          break;
        }
      }
      if (all_positive) {
        res.x.setZero();
        for (std::size_t c = 0; c < passive_idx.size(); ++c) {
          res.x[passive_idx[c]] = z[c];
        }
        break;
      }

      // Step toward z only as far as feasibility allows, then retire the
      // variables that hit zero.
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < passive_idx.size(); ++c) {
        if (z[c] <= 0.0) {
          const double xc = res.x[passive_idx[c]];
          alpha = std::min(alpha, xc / (xc - z[c]));
        }
      }
      for (std::size_t c = 0; c < passive_idx.size(); ++c) {
        const int j = passive_idx[c];
        res.x[j] += alpha * (z[c] - res.x[j]);
      }
      std::vector<int> kept;
      for (int j : passive_idx) {
        if (res.x[j] > 1e-14) {
          kept.push_back(j);
        } else {
          res.x[j] = 0.0;
          passive[j] = false;
        }
      }
      passive_idx = std::move(kept);
      if (passive_idx.empty()) break;
    }
  }

  res.residual_norm = (A * res.x - b).norm();
  return res;
}

}  // namespace scalefit
