#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace scalefit {

struct Feature {
  int index;  // 0-based
  double value;

  bool operator==(const Feature&) const = default;
};

struct Example {
  int label;  // -1 or +1
  std::vector<Feature> features;  // indices strictly increasing

  bool operator==(const Example&) const = default;
};

// Immutable after construction; shared read-only across workers.
struct Dataset {
  std::vector<Example> examples;
  int d = 0;  // feature dimension; every index < d

  int n() const { return static_cast<int>(examples.size()); }

  bool operator==(const Dataset&) const = default;
};

// m-way split of example indices. Round-robin over a seeded shuffle,
// so shard sizes differ by at most one.
struct Partitioning {
  int m = 1;
  std::vector<int> assignment;            // example index -> shard in [0, m)
  std::vector<std::vector<int>> shards;   // shard -> example indices, shuffle order
};

// LIBSVM text: "<label> <idx>:<val> ...", 1-based indices on disk,
// labels in {-1,+1} or {0,1} with 0 mapped to -1.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm(const std::string& text);
Dataset load_libsvm_file(const std::string& path);

// Inverse of parse_libsvm: values printed shortest-round-trip, so
// serialize-then-parse reproduces the dataset exactly.
std::string to_libsvm(const Dataset& ds);
void save_libsvm_file(const Dataset& ds, const std::string& path);

// FNV-1a over the canonical LIBSVM text, as 16 hex chars. Used to pair
// traces and models with the data they came from.
std::string dataset_hash(const Dataset& ds);

std::vector<int> round_robin(const std::vector<int>& order, int m);
Partitioning partition(const Dataset& ds, int m, std::uint64_t seed);

// Linearly separable labels from a random unit vector, spherical
// gaussian features, margin-based rejection, then exactly
// round(noise_frac*n) label flips. `truth_out`, when given, receives the
// generating unit vector (before flips the margin holds against it).
Dataset synth_classification(int n, int d, double margin, double noise_frac,
                             std::uint64_t seed,
                             std::vector<double>* truth_out = nullptr);

// Optional per-feature max-abs scaling to [-1, 1]. Changes the objective,
// so callers must record its use in trace metadata.
struct ScaleResult {
  Dataset dataset;
  std::vector<double> max_abs;  // per feature; 0 where the column is empty
};
ScaleResult max_abs_scale(const Dataset& ds);

std::uint64_t fnv1a64(const void* data, std::size_t len);

}  // namespace scalefit
