#include "scalefit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "scalefit/errors.hpp"
#include "scalefit/rng.hpp"

namespace scalefit {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double_token(const std::string& tok, int line_no, const char* what) {
  double v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError(std::string("bad ") + what + " '" + tok + "'", line_no);
  }
  return v;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Dataset parse_libsvm(std::istream& in) {
  Dataset ds;
  std::string line;
  int line_no = 0;
  int max_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    double raw_label = parse_double_token(tok, line_no, "label");
    int label;
    if (raw_label == 1.0) {
      label = +1;
    } else if (raw_label == -1.0 || raw_label == 0.0) {
      label = -1;  // {0,1} labels: 0 maps to -1
    } else {
      throw ParseError("label must be in {-1,0,+1}, got '" + tok + "'", line_no);
    }

    Example ex;
    ex.label = label;
    int prev_index = -1;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw ParseError("expected 'index:value', got '" + tok + "'", line_no);
      }
      int idx = 0;
      auto ir = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ir.ec != std::errc() || ir.ptr != tok.data() + colon || idx < 1) {
        throw ParseError("bad feature index in '" + tok + "'", line_no);
      }
      double val = parse_double_token(tok.substr(colon + 1), line_no, "feature value");
      int zero_based = idx - 1;
      if (zero_based <= prev_index) {
        throw ParseError("feature indices must be strictly increasing", line_no);
      }
      prev_index = zero_based;
      max_index = std::max(max_index, zero_based);
      ex.features.push_back({zero_based, val});
    }
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) throw ParseError("empty dataset", line_no == 0 ? 1 : line_no);
  ds.d = max_index + 1;
  return ds;
}

Dataset parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

Dataset load_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path);
  return parse_libsvm(in);
}

std::string to_libsvm(const Dataset& ds) {
  std::string out;
  for (const auto& ex : ds.examples) {
    out += ex.label > 0 ? "+1" : "-1";
    for (const auto& f : ex.features) {
      out += ' ';
      out += std::to_string(f.index + 1);
      out += ':';
      append_double(out, f.value);
    }
    out += '\n';
  }
  return out;
}

void save_libsvm_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file: " + path);
  out << to_libsvm(ds);
}

std::string dataset_hash(const Dataset& ds) {
  std::string text = to_libsvm(ds);
  std::uint64_t h = fnv1a64(text.data(), text.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<int> round_robin(const std::vector<int>& order, int m) {
  std::vector<int> assignment(order.size(), -1);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    assignment[order[pos]] = static_cast<int>(pos % m);
  }
  return assignment;
}

Partitioning partition(const Dataset& ds, int m, std::uint64_t seed) {
  const int n = ds.n();
  if (m < 1 || m > n) {
    throw InvalidParallelismError("machine count m=" + std::to_string(m) +
                                  " must satisfy 1 <= m <= n=" + std::to_string(n));
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream(seed, 0);
  rng.shuffle(order);

  Partitioning part;
  part.m = m;
  part.assignment = round_robin(order, m);
  part.shards.resize(m);
  for (int pos = 0; pos < n; ++pos) {
    part.shards[pos % m].push_back(order[pos]);
  }
  return part;
}

Dataset synth_classification(int n, int d, double margin, double noise_frac,
                             std::uint64_t seed,
                             std::vector<double>* truth_out) {
  if (n < 2 || d < 1) throw Error("synth_classification requires n >= 2, d >= 1");
  if (noise_frac < 0.0 || noise_frac > 1.0) {
    throw Error("noise_frac must be in [0,1]");
  }
  Rng rng = Rng::stream(seed, 0);

  std::vector<double> truth(d);
  double norm_sq = 0;
  do {
    norm_sq = 0;
    for (auto& t : truth) {
      t = rng.next_normal();
      norm_sq += t * t;
    }
  } while (norm_sq == 0.0);
  const double inv_norm = 1.0 / std::sqrt(norm_sq);
  for (auto& t : truth) t *= inv_norm;
  if (truth_out) *truth_out = truth;

  Dataset ds;
  ds.d = d;
  ds.examples.reserve(n);
  std::vector<double> x(d);
  while (ds.n() < n) {
    double ip = 0;
    for (int j = 0; j < d; ++j) {
      x[j] = rng.next_normal();
      ip += x[j] * truth[j];
    }
    if (std::abs(ip) < margin) continue;  // rejection keeps the margin
    Example ex;
    ex.label = ip >= 0 ? +1 : -1;
    ex.features.reserve(d);
    for (int j = 0; j < d; ++j) ex.features.push_back({j, x[j]});
    ds.examples.push_back(std::move(ex));
  }

  // Flips are drawn after generation, so a noise_frac=0 run with the same
  // seed reproduces the clean labels exactly.
  const int flips = static_cast<int>(std::llround(noise_frac * n));
  if (flips > 0) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < flips; ++i) {
      int j = i + static_cast<int>(rng.next_below(n - i));
      std::swap(idx[i], idx[j]);
      ds.examples[idx[i]].label = -ds.examples[idx[i]].label;
    }
  }
  return ds;
}

ScaleResult max_abs_scale(const Dataset& ds) {
  ScaleResult res;
  res.max_abs.assign(ds.d, 0.0);
  for (const auto& ex : ds.examples) {
    for (const auto& f : ex.features) {
      res.max_abs[f.index] = std::max(res.max_abs[f.index], std::abs(f.value));
    }
  }
  res.dataset = ds;
  for (auto& ex : res.dataset.examples) {
    for (auto& f : ex.features) {
      if (res.max_abs[f.index] > 0) f.value /= res.max_abs[f.index];
    }
  }
  return res;
}

}  // namespace scalefit
