#pragma once

#include <span>
#include <vector>

namespace scalefit {

// Binary-tree combines over shard index. Always applied serially after the
// parallel section, so results do not depend on the thread schedule and a
// given partitioning always reduces in the same order.

double tree_sum(std::span<const double> parts);

// Elementwise tree combine; result left in parts[0].
void tree_sum_vectors(std::vector<std::vector<double>>& parts);

}  // namespace scalefit
