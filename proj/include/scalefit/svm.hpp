#pragma once

#include <span>
#include <vector>

#include "scalefit/dataset.hpp"
#include "scalefit/rng.hpp"

namespace scalefit {

// L2-regularized linear SVM with hinge loss:
//   P(w) = (reg/2)*||w||^2 + (1/n) * sum_j max(0, 1 - y_j <x_j, w>)
struct SvmProblem {
  const Dataset* data = nullptr;
  double reg = 1.0;

  int n() const { return data->n(); }
  int d() const { return data->d; }

  // Upper end of the dual box: alpha_j * y_j in [0, 1/(reg*n)].
  double dual_box() const { return 1.0 / (reg * n()); }
};

double dot_example(const Example& ex, std::span<const double> w);
void axpy_example(double a, const Example& ex, std::span<double> w);

double primal_objective(const SvmProblem& p, std::span<const double> w);

// Dual in the signed-alpha parameterization:
//   w(alpha) = sum_j alpha_j x_j
//   D(alpha) = reg * sum_j alpha_j y_j - (reg/2) * ||w(alpha)||^2
// subject to alpha_j y_j in [0, 1/(reg*n)]. This keeps the stated box
// constraint exact and gives D(0) = 0, w(0) = 0.
double dual_objective(const SvmProblem& p, std::span<const double> alpha);

std::vector<double> weights_from_alpha(const SvmProblem& p,
                                       std::span<const double> alpha);

bool dual_feasible(const SvmProblem& p, std::span<const double> alpha,
                   double slack = 1e-12);

// One machine's contribution to a BSP round: delta_alpha over its shard
// plus the induced weight change sum_j delta_alpha_j x_j.
struct LocalDelta {
  std::vector<double> delta_alpha;  // aligned with the shard's index list
  std::vector<double> delta_w;      // length d
};

// `local_iters` coordinate steps of dual ascent on the shard, each picking
// a uniformly random local coordinate and applying the closed-form hinge
// update against w_shared plus sigma_prime times the accumulated local
// weight delta. The returned delta keeps alpha feasible.
LocalDelta sdca_local_step(const SvmProblem& p, std::span<const int> shard,
                           std::span<const double> alpha,
                           std::span<const double> w_shared,
                           double sigma_prime, int local_iters, Rng& rng);

// Sum over `shard` of hinge subgradients at w: adds -y_j x_j for every
// example with margin y_j <x_j, w> < 1 into `grad`. The margin-exactly-1
// kink contributes 0. Returns the number of margin violations.
int hinge_subgradient_sum(const SvmProblem& p, std::span<const int> shard,
                          std::span<const double> w, std::span<double> grad);

// Draws min(quota, |shard|) examples without replacement and accumulates
// their hinge subgradients into `grad`. Returns the number drawn.
int sample_subgradient_shard(const SvmProblem& p, std::span<const int> shard,
                             int quota, std::span<const double> w, Rng& rng,
                             std::span<double> grad);

// Pegasos update with eta_t = 1/(reg*t):
//   w' = (1 - eta_t*reg) * w - eta_t * loss_grad
std::vector<double> pegasos_step(const SvmProblem& p, std::span<const double> w,
                                 std::span<const double> loss_grad, int t);

// Single BSP mini-batch SGD step: every shard samples `b/m` local examples
// without replacement, subgradients are summed, averaged over the batch,
// and one Pegasos step is applied. `t` is the 1-based step index.
std::vector<double> minibatch_sgd_step(const SvmProblem& p,
                                       const Partitioning& part,
                                       std::span<const double> w, int b, int t,
                                       std::span<Rng> shard_rngs);

}  // namespace scalefit
