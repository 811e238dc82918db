#pragma once

#include <Eigen/Dense>

namespace scalefit {

struct NnlsResult {
  Eigen::VectorXd x;        // the nonnegative minimizer
  double residual_norm;     // ||A x - b||_2
  bool rank_deficient;      // a passive-set solve hit rank deficiency
  int outer_iterations;
};

// Lawson-Hanson active-set method for min ||A x - b||_2 s.t. x >= 0.
// Passive-set subproblems are solved by a complete orthogonal
// decomposition, so rank-deficient designs yield the minimum-norm
// passive solution and are flagged rather than rejected.
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace scalefit
