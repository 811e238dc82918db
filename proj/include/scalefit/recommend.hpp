#pragma once

#include <string>
#include <vector>

#include "scalefit/convergence.hpp"
#include "scalefit/system_model.hpp"

namespace scalefit {

// A system model and a convergence model fitted on the same algorithm and
// dataset. Provenance stamps are compared when both sides carry them;
// planted or synthetic models with empty stamps pass unchecked.
struct ModelPair {
  std::string algorithm;
  SystemModel system;
  ConvergenceModel convergence;
};

ModelPair make_model_pair(std::string algorithm, SystemModel system,
                          ConvergenceModel convergence);

// Predicted suboptimality after t seconds on m machines:
//   h(t, m) = g(t / f(m), m), with t/f(m) clamped up to 1 iteration.
// `clamped` reports when the clamp fired.
double h_suboptimality(const ModelPair& pair, double t, int m,
                       bool* clamped = nullptr);

struct CandidateRow {
  std::string algorithm;
  int m = 1;
  double value = 0.0;           // time_s or suboptimality
  bool feasible = true;
  long long iterations = 0;     // iterations behind `value`
};

struct Recommendation {
  std::string algorithm;
  int m = 1;
  double predicted_value = 0.0;
  std::string metric;  // "time_s" | "suboptimality"
  std::vector<CandidateRow> table;
};

class NoFeasibleConfigurationError : public Error {
 public:
  NoFeasibleConfigurationError(const std::string& what,
                               std::vector<CandidateRow> table)
      : Error(what), table_(std::move(table)) {}
  const std::vector<CandidateRow>& table() const { return table_; }

 private:
  std::vector<CandidateRow> table_;
};

// Fastest (algorithm, m) predicted to reach suboptimality <= epsilon.
// Iteration counts are found by doubling then bisection up to 10^6;
// candidates that never get there are excluded but kept in the table.
// Ties break to the smaller m, then to pair order.
Recommendation recommend_for_epsilon(const std::vector<ModelPair>& pairs,
                                     double epsilon,
                                     const std::vector<int>& m_grid);

// Lowest predicted suboptimality within a time budget; only completed
// iterations count, so i = max(floor(t/f(m)), 1).
Recommendation recommend_for_deadline(const std::vector<ModelPair>& pairs,
                                      double t_budget,
                                      const std::vector<int>& m_grid);

void save_recommendation_csv(const Recommendation& rec,
                             const std::string& path);
std::string recommendation_verdict(const Recommendation& rec);

}  // namespace scalefit
