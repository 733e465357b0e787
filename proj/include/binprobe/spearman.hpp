#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "binprobe/errors.hpp"

namespace binprobe {

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;                // two-sided, t-approximation
  std::optional<double> exact_p;       // exhaustive permutation p, n <= 10
  std::size_t n = 0;
};

namespace detail {

/// 1-based average ranks (ties share the mean of their positions).
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("constant score list");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

/// Spearman rank correlation with average ranks for ties. p_value uses the
/// t-approximation t = rho * sqrt((n-2)/(1-rho^2)); for n <= 10 an exhaustive
/// permutation p (two-sided: fraction of permutations with |rho| at least the
/// observed) is computed as well.
inline SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw LengthMismatch(x.size(), y.size());
  if (x.size() < 3)
    throw InsufficientData("need at least 3 paired scores, got " + std::to_string(x.size()));

  std::vector<double> rx = detail::average_ranks(x);
  std::vector<double> ry = detail::average_ranks(y);

  SpearmanResult result;
  result.n = x.size();
  result.rho = detail::pearson(rx, ry);

  double r2 = result.rho * result.rho;
  if (r2 >= 1.0) {
    result.p_value = 0.0;
  } else {
    double df = static_cast<double>(result.n - 2);
    double t = result.rho * std::sqrt(df / (1.0 - r2));
    boost::math::students_t dist(df);
    result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }

  if (result.n <= 10) {
    std::vector<double> perm = ry;
    std::sort(perm.begin(), perm.end());
    std::size_t total = 0, at_least = 0;
    double target = std::abs(result.rho) - 1e-12;
    do {
      ++total;
      if (std::abs(detail::pearson(rx, perm)) >= target) ++at_least;
    } while (std::next_permutation(perm.begin(), perm.end()));
    result.exact_p = static_cast<double>(at_least) / static_cast<double>(total);
  }
  return result;
}

}  // namespace binprobe
