#include "scalefit/reduce.hpp"

namespace scalefit {

double tree_sum(std::span<const double> parts) {
  if (parts.empty()) return 0.0;
  std::vector<double> buf(parts.begin(), parts.end());
  for (std::size_t stride = 1; stride < buf.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < buf.size(); i += 2 * stride) {
      buf[i] += buf[i + stride];
    }
  }
  return buf[0];
}

void tree_sum_vectors(std::vector<std::vector<double>>& parts) {
  if (parts.empty()) return;
  for (std::size_t stride = 1; stride < parts.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < parts.size(); i += 2 * stride) {
      auto& dst = parts[i];
      const auto& src = parts[i + stride];
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
}

}  // namespace scalefit
