#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "binprobe/errors.hpp"

namespace binprobe {

namespace detail {

/// 53-bit uniform double in [0, 1); stable across platforms, unlike
/// std::uniform_real_distribution.
inline double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

struct NucleusSupport {
  std::vector<std::size_t> indices;  // original indices, by descending probability
  std::vector<double> probs;         // renormalized over the kept prefix
};

/// Truncate `dist` to the smallest descending-probability prefix with
/// cumulative mass >= p and renormalize. Ties in probability keep original
/// index order; zero-probability entries never enter the support.
inline NucleusSupport nucleus_truncate(const std::vector<double>& dist, double p) {
  if (!(p > 0.0) || p > 1.0) throw InvalidP(p);
  if (dist.empty()) throw InvalidDistribution("empty distribution");
  double sum = 0.0;
  for (double v : dist) {
    if (v < 0.0) throw InvalidDistribution("negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw InvalidDistribution("probabilities sum to " + std::to_string(sum));

  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] > dist[b];
    return a < b;
  });

  NucleusSupport support;
  double cum = 0.0;
  for (std::size_t idx : order) {
    if (dist[idx] <= 0.0) break;
    support.indices.push_back(idx);
    cum += dist[idx];
    if (cum >= p) break;
  }
  if (support.indices.empty()) throw InvalidDistribution("no positive-probability entries");
  support.probs.reserve(support.indices.size());
  for (std::size_t idx : support.indices) support.probs.push_back(dist[idx] / cum);
  return support;
}

/// Draw one original index from the nucleus-truncated distribution.
inline std::size_t nucleus_sample(const std::vector<double>& dist, double p, std::mt19937_64& rng) {
  NucleusSupport support = nucleus_truncate(dist, p);
  double u = detail::uniform_double(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < support.probs.size(); ++i) {
    cum += support.probs[i];
    if (u < cum) return support.indices[i];
  }
  return support.indices.back();  // guard against rounding at u ~ 1
}

}  // namespace binprobe
