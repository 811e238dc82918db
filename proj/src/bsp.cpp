#include "scalefit/bsp.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "scalefit/reduce.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scalefit {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kCocoa: return "cocoa";
    case Algorithm::kCocoaPlus: return "cocoa_plus";
    case Algorithm::kMinibatchSgd: return "minibatch_sgd";
    case Algorithm::kFullGd: return "full_gd";
  }
  throw Error("unknown algorithm enum");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "cocoa") return Algorithm::kCocoa;
  if (name == "cocoa_plus") return Algorithm::kCocoaPlus;
  if (name == "minibatch_sgd") return Algorithm::kMinibatchSgd;
  if (name == "full_gd") return Algorithm::kFullGd;
  throw Error("unknown algorithm '" + name + "'");
}

double AlgorithmConfig::gamma() const {
  return algorithm == Algorithm::kCocoa ? 1.0 / m : 1.0;
}

double AlgorithmConfig::sigma_prime() const {
  return algorithm == Algorithm::kCocoaPlus ? static_cast<double>(m) : 1.0;
}

namespace {

template <typename F>
void for_each_shard(int m, ExecMode exec, F&& f) {
#ifdef _OPENMP
  if (exec == ExecMode::kParallel) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < m; ++k) f(k);
    return;
  }
#else
  (void)exec;
#endif
  for (int k = 0; k < m; ++k) f(k);
}

double squared_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

// Per-shard partial sums combined by the fixed tree; identical results in
// serial and parallel mode.
double sharded_hinge_sum(const SvmProblem& p, const Partitioning& part,
                         std::span<const double> w, ExecMode exec) {
  std::vector<double> parts(part.m, 0.0);
  for_each_shard(part.m, exec, [&](int k) {
    double s = 0;
    for (int j : part.shards[k]) {
      const Example& ex = p.data->examples[j];
      const double margin = ex.label * dot_example(ex, w);
      if (margin < 1.0) s += 1.0 - margin;
    }
    parts[k] = s;
  });
  return tree_sum(parts);
}

double sharded_primal(const SvmProblem& p, const Partitioning& part,
                      std::span<const double> w, ExecMode exec) {
  return 0.5 * p.reg * squared_norm(w) +
         sharded_hinge_sum(p, part, w, exec) / p.n();
}

double sharded_dual(const SvmProblem& p, const Partitioning& part,
                    std::span<const double> alpha, std::span<const double> w,
                    ExecMode exec) {
  std::vector<double> parts(part.m, 0.0);
  for_each_shard(part.m, exec, [&](int k) {
    double s = 0;
    for (int j : part.shards[k]) s += alpha[j] * p.data->examples[j].label;
    parts[k] = s;
  });
  return p.reg * tree_sum(parts) - 0.5 * p.reg * squared_norm(w);
}

// w is re-derived from alpha after every aggregation rather than updated
// incrementally, so the recorded duality gap certifies the actual iterate
// instead of a drifted copy.
void sharded_weights_from_alpha(const SvmProblem& p, const Partitioning& part,
                                std::span<const double> alpha,
                                std::vector<std::vector<double>>& partials,
                                std::vector<double>& w, ExecMode exec) {
  for_each_shard(part.m, exec, [&](int k) {
    auto& wk = partials[k];
    std::fill(wk.begin(), wk.end(), 0.0);
    for (int j : part.shards[k]) {
      if (alpha[j] != 0.0) axpy_example(alpha[j], p.data->examples[j], wk);
    }
  });
  tree_sum_vectors(partials);
  w = partials[0];
}

void validate_config(const SvmProblem& problem, const AlgorithmConfig& config) {
  if (problem.data == nullptr || problem.n() < 1) {
    throw Error("run_bsp: empty problem");
  }
  if (!(problem.reg > 0)) throw Error("run_bsp: reg must be > 0");
  if (config.m < 1 || config.m > problem.n()) {
    throw InvalidParallelismError(
        "run_bsp: m=" + std::to_string(config.m) + " out of range for n=" +
        std::to_string(problem.n()));
  }
  if (config.max_iters < 0) throw Error("run_bsp: max_iters must be >= 0");
  if (config.algorithm == Algorithm::kMinibatchSgd && config.batch_size < 1) {
    throw Error("run_bsp: minibatch_sgd requires batch_size >= 1");
  }
}

}  // namespace

Trace run_bsp(const SvmProblem& problem, const AlgorithmConfig& config,
              const RunOptions& options) {
  validate_config(problem, config);
  if (options.timing == TimingMode::kSynthetic && !options.timing_model) {
    throw InvalidModelError("run_bsp: synthetic timing needs a system model");
  }

  const int n = problem.n();
  const int d = problem.d();
  const int m = config.m;
  const ExecMode exec = options.exec;
  const Partitioning part = partition(*problem.data, m, config.seed);
  const int local_iters =
      config.local_iters > 0 ? config.local_iters : (n + m - 1) / m;
  const int quota = config.algorithm == Algorithm::kMinibatchSgd
                        ? (config.batch_size + m - 1) / m
                        : 0;

  Trace trace;
  trace.meta.algorithm = algorithm_name(config.algorithm);
  trace.meta.m = m;
  trace.meta.dataset_path = options.dataset_path;
  trace.meta.dataset_hash = options.dataset_hash;
  trace.meta.reg = problem.reg;
  trace.meta.local_iters = config.has_dual() ? local_iters : 0;
  trace.meta.gamma = config.gamma();
  trace.meta.sigma_prime = config.sigma_prime();
  trace.meta.batch_size = quota * m;
  trace.meta.step_rule = config.has_dual() ? "" : "pegasos";
  trace.meta.max_iters = config.max_iters;
  trace.meta.epsilon = config.epsilon;
  trace.meta.seed = config.seed;
  trace.meta.timing_mode =
      options.timing == TimingMode::kMeasured ? "measured" : "synthetic";
  trace.meta.scaled = options.scaled;
  trace.meta.p_star = options.p_star;

  std::vector<Rng> rngs;
  rngs.reserve(m);
  for (int k = 0; k < m; ++k) rngs.push_back(Rng::stream(config.seed, 1 + k));

  std::vector<double> w(d, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<std::vector<double>> partials(m, std::vector<double>(d, 0.0));

  const double synthetic_dt =
      options.timing == TimingMode::kSynthetic
          ? predict_time(*options.timing_model, m)
          : 0.0;
  double cumulative = 0.0;

  const auto record = [&](int iter, double primal, std::optional<double> gap,
                          double dt) {
    cumulative += dt;
    trace.records.push_back({iter, primal, gap, dt, cumulative});
  };

  const auto check_finite = [&](double primal) {
    if (!std::isfinite(primal)) {
      trace.meta.diverged = true;
      throw DivergenceError(
          "run_bsp: non-finite objective at iteration " +
              std::to_string(trace.records.size()),
          trace);
    }
  };

  const auto stop_reached = [&](double primal) {
    return options.p_star.has_value() &&
           primal - *options.p_star <= config.epsilon;
  };

  const auto inspect = [&](int iter) {
    if (options.inspect) options.inspect(iter, alpha, w);
  };

  double primal = sharded_primal(problem, part, w, exec);
  check_finite(primal);
  std::optional<double> gap;
  if (config.has_dual()) {
    gap = primal - sharded_dual(problem, part, alpha, w, exec);
  }
  record(0, primal, gap, 0.0);
  inspect(0);
  if (stop_reached(primal)) return trace;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();

    switch (config.algorithm) {
      case Algorithm::kCocoa:
      case Algorithm::kCocoaPlus: {
        const double gamma = config.gamma();
        const double sigma_prime = config.sigma_prime();
        std::vector<LocalDelta> deltas(m);
        for_each_shard(m, exec, [&](int k) {
          deltas[k] = sdca_local_step(problem, part.shards[k], alpha, w,
                                      sigma_prime, local_iters, rngs[k]);
        });
        for (int k = 0; k < m; ++k) {
          const auto& shard = part.shards[k];
          for (std::size_t i = 0; i < shard.size(); ++i) {
            alpha[shard[i]] += gamma * deltas[k].delta_alpha[i];
          }
        }
        sharded_weights_from_alpha(problem, part, alpha, partials, w, exec);
        break;
      }
      case Algorithm::kMinibatchSgd: {
        std::vector<double> counts(m, 0.0);
        for_each_shard(m, exec, [&](int k) {
          auto& gk = partials[k];
          std::fill(gk.begin(), gk.end(), 0.0);
          counts[k] = sample_subgradient_shard(problem, part.shards[k], quota,
                                               w, rngs[k], gk);
        });
        tree_sum_vectors(partials);
        const double batch = tree_sum(counts);
        std::vector<double> avg(d);
        for (int j = 0; j < d; ++j) avg[j] = partials[0][j] / batch;
        w = pegasos_step(problem, w, avg, iter);
        break;
      }
      case Algorithm::kFullGd: {
        for_each_shard(m, exec, [&](int k) {
          auto& gk = partials[k];
          std::fill(gk.begin(), gk.end(), 0.0);
          hinge_subgradient_sum(problem, part.shards[k], w, gk);
        });
        tree_sum_vectors(partials);
        std::vector<double> avg(d);
        for (int j = 0; j < d; ++j) avg[j] = partials[0][j] / n;
        w = pegasos_step(problem, w, avg, iter);
        break;
      }
    }

    double dt;
    if (options.timing == TimingMode::kSynthetic) {
      dt = synthetic_dt;
    } else {
      dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
               .count();
    }

    primal = sharded_primal(problem, part, w, exec);
    check_finite(primal);
    if (config.has_dual()) {
      gap = primal - sharded_dual(problem, part, alpha, w, exec);
      check_finite(*gap);
    }
    record(iter, primal, gap, dt);
    inspect(iter);
    if (stop_reached(primal)) break;
  }
  return trace;
}

ReferenceOptimum reference_optimum(const SvmProblem& problem, int max_outer,
                                   double gap_tol, std::uint64_t seed) {
  const int n = problem.n();
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);

  Rng rng = Rng::stream(seed, 1);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> w(problem.d(), 0.0);

  ReferenceOptimum out;
  double primal = primal_objective(problem, w);
  double gap = primal;  // D(0) = 0
  for (int outer = 1; outer <= max_outer; ++outer) {
    LocalDelta delta =
        sdca_local_step(problem, all, alpha, w, /*sigma_prime=*/1.0,
                        /*local_iters=*/n, rng);
    for (int j = 0; j < n; ++j) alpha[j] += delta.delta_alpha[j];
    w = weights_from_alpha(problem, alpha);
    primal = primal_objective(problem, w);
    gap = primal - dual_objective(problem, alpha);
    out.iterations = outer;
    if (gap < gap_tol) break;
  }
  out.p_star = primal;
  out.gap = gap;
  out.loose = !(gap < 1e-6);
  return out;
}

}  // namespace scalefit
