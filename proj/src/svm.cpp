#include "scalefit/svm.hpp"

#include <algorithm>
#include <cmath>

#include "scalefit/errors.hpp"
#include "scalefit/reduce.hpp"

namespace scalefit {

double dot_example(const Example& ex, std::span<const double> w) {
  double s = 0;
  for (const auto& f : ex.features) s += f.value * w[f.index];
  return s;
}

void axpy_example(double a, const Example& ex, std::span<double> w) {
  for (const auto& f : ex.features) w[f.index] += a * f.value;
}

namespace {

double squared_norm_example(const Example& ex) {
  double s = 0;
  for (const auto& f : ex.features) s += f.value * f.value;
  return s;
}

double squared_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

double primal_objective(const SvmProblem& p, std::span<const double> w) {
  double hinge = 0;
  for (const auto& ex : p.data->examples) {
    const double margin = ex.label * dot_example(ex, w);
    if (margin < 1.0) hinge += 1.0 - margin;
  }
  return 0.5 * p.reg * squared_norm(w) + hinge / p.n();
}

bool dual_feasible(const SvmProblem& p, std::span<const double> alpha,
                   double slack) {
  const double box = p.dual_box();
  for (int j = 0; j < p.n(); ++j) {
    const double beta = alpha[j] * p.data->examples[j].label;
    if (!(beta >= -slack && beta <= box + slack)) return false;
    if (!std::isfinite(alpha[j])) return false;
  }
  return true;
}

std::vector<double> weights_from_alpha(const SvmProblem& p,
                                       std::span<const double> alpha) {
  std::vector<double> w(p.d(), 0.0);
  for (int j = 0; j < p.n(); ++j) {
    if (alpha[j] != 0.0) axpy_example(alpha[j], p.data->examples[j], w);
  }
  return w;
}

double dual_objective(const SvmProblem& p, std::span<const double> alpha) {
  if (!dual_feasible(p, alpha)) {
    throw FeasibilityError("alpha violates the dual box constraint");
  }
  double lin = 0;
  for (int j = 0; j < p.n(); ++j) lin += alpha[j] * p.data->examples[j].label;
  const auto w = weights_from_alpha(p, alpha);
  return p.reg * lin - 0.5 * p.reg * squared_norm(w);
}

LocalDelta sdca_local_step(const SvmProblem& p, std::span<const int> shard,
                           std::span<const double> alpha,
                           std::span<const double> w_shared,
                           double sigma_prime, int local_iters, Rng& rng) {
  const double box = p.dual_box();
  LocalDelta out;
  out.delta_alpha.assign(shard.size(), 0.0);
  out.delta_w.assign(p.d(), 0.0);
  if (shard.empty()) return out;

  for (int step = 0; step < local_iters; ++step) {
    const std::size_t k = static_cast<std::size_t>(rng.next_below(shard.size()));
    const Example& ex = p.data->examples[shard[k]];
    const double y = ex.label;
    const double beta = (alpha[shard[k]] + out.delta_alpha[k]) * y;
    const double xx = squared_norm_example(ex);
    const double margin =
        y * (dot_example(ex, w_shared) +
             sigma_prime * dot_example(ex, out.delta_w));
    double beta_new;
    if (xx > 0.0) {
      beta_new = std::clamp(beta + (1.0 - margin) / (sigma_prime * xx), 0.0, box);
    } else {
      // All-zero row: the local objective is linear in beta with positive
      // slope, so the maximizer sits at the box edge.
      beta_new = box;
    }
    const double d_beta = beta_new - beta;
    if (d_beta != 0.0) {
      const double d_alpha = d_beta * y;
      out.delta_alpha[k] += d_alpha;
      axpy_example(d_alpha, ex, out.delta_w);
    }
  }
  return out;
}

int hinge_subgradient_sum(const SvmProblem& p, std::span<const int> shard,
                          std::span<const double> w, std::span<double> grad) {
  int violations = 0;
  for (int j : shard) {
    const Example& ex = p.data->examples[j];
    const double margin = ex.label * dot_example(ex, w);
    if (margin < 1.0) {
      axpy_example(-static_cast<double>(ex.label), ex, grad);
      ++violations;
    }
  }
  return violations;
}

std::vector<double> pegasos_step(const SvmProblem& p, std::span<const double> w,
                                 std::span<const double> loss_grad, int t) {
  const double eta = 1.0 / (p.reg * t);
  const double shrink = 1.0 - eta * p.reg;
  std::vector<double> next(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    next[j] = shrink * w[j] - eta * loss_grad[j];
  }
  return next;
}

int sample_subgradient_shard(const SvmProblem& p, std::span<const int> shard,
                             int quota, std::span<const double> w, Rng& rng,
                             std::span<double> grad) {
  const int take = std::min<int>(quota, static_cast<int>(shard.size()));
  std::vector<int> pool(shard.begin(), shard.end());
  for (int i = 0; i < take; ++i) {
    int j = i + static_cast<int>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  hinge_subgradient_sum(p, std::span<const int>(pool.data(), take), w, grad);
  return take;
}

std::vector<double> minibatch_sgd_step(const SvmProblem& p,
                                       const Partitioning& part,
                                       std::span<const double> w, int b, int t,
                                       std::span<Rng> shard_rngs) {
  const int m = part.m;
  const int quota = (b + m - 1) / m;  // b rounded up to a multiple of m

  std::vector<std::vector<double>> grads(m);
  std::vector<double> sampled(m, 0.0);
  for (int k = 0; k < m; ++k) {
    grads[k].assign(p.d(), 0.0);
    sampled[k] = sample_subgradient_shard(p, part.shards[k], quota, w,
                                          shard_rngs[k], grads[k]);
  }

  tree_sum_vectors(grads);
  const double batch = tree_sum(sampled);
  std::vector<double> avg_grad(p.d());
  for (int j = 0; j < p.d(); ++j) avg_grad[j] = grads[0][j] / batch;
  return pegasos_step(p, w, avg_grad, t);
}

}  // namespace scalefit
