#include "scalefit/recommend.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "scalefit/kv_io.hpp"

namespace scalefit {

namespace {

constexpr long long kMaxIterations = 1000000;  // 10^6 extrapolation cap

void validate_pair(const ModelPair& pair) {
  if (!pair.system.dataset_hash.empty() &&
      !pair.convergence.dataset_hash.empty() &&
      pair.system.dataset_hash != pair.convergence.dataset_hash) {
    throw InvalidModelError("model pair '" + pair.algorithm +
                            "': system and convergence models come from "
                            "different datasets");
  }
  if (!pair.system.algorithm.empty() && !pair.convergence.algorithm.empty() &&
      pair.system.algorithm != pair.convergence.algorithm) {
    throw InvalidModelError("model pair '" + pair.algorithm +
                            "': system and convergence models come from "
                            "different algorithms");
  }
}

double iteration_time(const ModelPair& pair, int m) {
  const double f = predict_time(pair.system, m);
  if (!(f > 0.0)) {
    throw InvalidModelError("model pair '" + pair.algorithm +
                            "': f(m) <= 0 at m=" + std::to_string(m));
  }
  return f;
}

// Smallest integer i <= cap with g(i, m) <= epsilon, or -1. Doubling
// first, then integer bisection on the bracket.
long long smallest_reaching_iteration(const ConvergenceModel& model,
                                      double epsilon, int m) {
  const auto reaches = [&](long long i) {
    return predict_g(model, static_cast<double>(i), m) <= epsilon;
  };
  if (reaches(1)) return 1;
  long long lo = 1;  // known not to reach
  long long hi = 2;
  while (hi < kMaxIterations && !reaches(hi)) {
    lo = hi;
    hi *= 2;
  }
  if (hi > kMaxIterations) hi = kMaxIterations;
  if (!reaches(hi)) return -1;
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    (reaches(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

ModelPair make_model_pair(std::string algorithm, SystemModel system,
                          ConvergenceModel convergence) {
  ModelPair pair{std::move(algorithm), std::move(system),
                 std::move(convergence)};
  validate_pair(pair);
  return pair;
}

double h_suboptimality(const ModelPair& pair, double t, int m, bool* clamped) {
  if (t < 0.0) throw Error("h: t must be >= 0");
  if (m < 1) throw Error("h: m must be >= 1");
  const double f = iteration_time(pair, m);
  double i = t / f;
  if (clamped) *clamped = i < 1.0;
  if (i < 1.0) i = 1.0;
  return predict_g(pair.convergence, i, m);
}

Recommendation recommend_for_epsilon(const std::vector<ModelPair>& pairs,
                                     double epsilon,
                                     const std::vector<int>& m_grid) {
  if (!(epsilon > 0.0)) throw Error("recommend_for_epsilon: epsilon must be > 0");
  if (pairs.empty() || m_grid.empty()) {
    throw Error("recommend_for_epsilon: empty pairs or m grid");
  }
  for (const auto& pair : pairs) validate_pair(pair);

  Recommendation rec;
  rec.metric = "time_s";
  int best = -1;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (int m : m_grid) {
      CandidateRow row;
      row.algorithm = pairs[p].algorithm;
      row.m = m;
      const long long i =
          smallest_reaching_iteration(pairs[p].convergence, epsilon, m);
      if (i < 0) {
        row.feasible = false;
        row.iterations = kMaxIterations;
        row.value = std::numeric_limits<double>::infinity();
      } else {
        row.iterations = i;
        row.value = static_cast<double>(i) * iteration_time(pairs[p], m);
      }
      rec.table.push_back(row);
      if (!row.feasible) continue;
      // Strict comparisons keep ties at the earlier (smaller m, earlier
      // pair) candidate; the grid is scanned in that order per pair, so
      // compare across pairs via (value, m, pair index).
      if (best < 0) {
        best = static_cast<int>(rec.table.size()) - 1;
        continue;
      }
      const CandidateRow& cur = rec.table[best];
      if (row.value < cur.value ||
          (row.value == cur.value && row.m < cur.m)) {
        best = static_cast<int>(rec.table.size()) - 1;
      }
    }
  }
  if (best < 0) {
    throw NoFeasibleConfigurationError(
        "no candidate reaches epsilon=" + format_double(epsilon) +
        " within the iteration cap",
        rec.table);
  }
  rec.algorithm = rec.table[best].algorithm;
  rec.m = rec.table[best].m;
  rec.predicted_value = rec.table[best].value;
  return rec;
}

Recommendation recommend_for_deadline(const std::vector<ModelPair>& pairs,
                                      double t_budget,
                                      const std::vector<int>& m_grid) {
  if (!(t_budget > 0.0)) {
    throw Error("recommend_for_deadline: t_budget must be > 0");
  }
  if (pairs.empty() || m_grid.empty()) {
    throw Error("recommend_for_deadline: empty pairs or m grid");
  }
  for (const auto& pair : pairs) validate_pair(pair);

  Recommendation rec;
  rec.metric = "suboptimality";
  int best = -1;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (int m : m_grid) {
      CandidateRow row;
      row.algorithm = pairs[p].algorithm;
      row.m = m;
      const double f = iteration_time(pairs[p], m);
      // Only completed iterations count toward the deadline.
      long long i = static_cast<long long>(std::floor(t_budget / f));
      if (i < 1) i = 1;
      row.iterations = i;
      row.value = predict_g(pairs[p].convergence, static_cast<double>(i), m);
      rec.table.push_back(row);
      if (best < 0) {
        best = static_cast<int>(rec.table.size()) - 1;
        continue;
      }
      const CandidateRow& cur = rec.table[best];
      if (row.value < cur.value ||
          (row.value == cur.value && row.m < cur.m)) {
        best = static_cast<int>(rec.table.size()) - 1;
      }
    }
  }
  rec.algorithm = rec.table[best].algorithm;
  rec.m = rec.table[best].m;
  rec.predicted_value = rec.table[best].value;
  return rec;
}

void save_recommendation_csv(const Recommendation& rec,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "algorithm,m,metric,value,feasible\n";
  for (const auto& row : rec.table) {
    out << row.algorithm << ',' << row.m << ',' << rec.metric << ','
        << (std::isfinite(row.value) ? format_double(row.value) : "inf") << ','
        << (row.feasible ? "1" : "0") << '\n';
  }
}

std::string recommendation_verdict(const Recommendation& rec) {
  if (rec.metric == "time_s") {
    return "best: " + rec.algorithm + " m=" + std::to_string(rec.m) +
           " t=" + format_double(rec.predicted_value);
  }
  return "best: " + rec.algorithm + " m=" + std::to_string(rec.m) +
         " loss=" + format_double(rec.predicted_value);
}

}  // namespace scalefit
