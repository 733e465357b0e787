#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "binprobe/errors.hpp"

namespace binprobe {

/// Contract for anything that can emit P(next token | projected conditioning,
/// decoded prefix). Distributions are over a fixed token id range.
class AutoregressiveScorer {
 public:
  virtual ~AutoregressiveScorer() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual Eigen::VectorXd next_token_distribution(const Eigen::MatrixXd& conditioning,
                                                  std::span<const int> prefix) const = 0;
};

/// Lookup-table scorer for tests and offline simulation: maps a prefix (joined
/// token ids) to a stored distribution, with an optional fallback.
class TableScorer : public AutoregressiveScorer {
 public:
  explicit TableScorer(std::size_t vocab) : vocab_(vocab) {}

  static std::string key_for(std::span<const int> prefix) {
    std::string key;
    for (int t : prefix) {
      if (!key.empty()) key.push_back(' ');
      key += std::to_string(t);
    }
    return key;
  }

  void set(std::span<const int> prefix, Eigen::VectorXd dist) {
    table_[key_for(prefix)] = std::move(dist);
  }

  void set_fallback(Eigen::VectorXd dist) { fallback_ = std::move(dist); }

  std::size_t vocab_size() const override { return vocab_; }

  Eigen::VectorXd next_token_distribution(const Eigen::MatrixXd&,
                                          std::span<const int> prefix) const override {
    auto it = table_.find(key_for(prefix));
    if (it != table_.end()) return it->second;
    if (fallback_.size() > 0) return fallback_;
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(vocab_),
                                     1.0 / static_cast<double>(vocab_));
  }

 private:
  std::size_t vocab_;
  std::map<std::string, Eigen::VectorXd> table_;
  Eigen::VectorXd fallback_;
};

namespace detail {

inline void check_distribution(const Eigen::VectorXd& dist, std::size_t vocab) {
  if (static_cast<std::size_t>(dist.size()) != vocab)
    throw InvalidDistribution("distribution length " + std::to_string(dist.size()) +
                              " != vocab size " + std::to_string(vocab));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    if (dist[i] < 0.0) throw InvalidDistribution("negative probability at index " + std::to_string(i));
    sum += dist[i];
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
}

}  // namespace detail

/// Negative log-likelihood of `target` under the scorer, teacher-forced:
/// nll = -sum_i log P(target_i | conditioning, target_<i). Each emitted
/// distribution is validated; a zero-probability target token at position i
/// raises ZeroProbabilityToken(i).
inline double alignment_nll(const AutoregressiveScorer& scorer, const Eigen::MatrixXd& conditioning,
                            std::span<const int> target) {
  double nll = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    Eigen::VectorXd dist = scorer.next_token_distribution(conditioning, target.first(i));
    detail::check_distribution(dist, scorer.vocab_size());
    int tok = target[i];
    if (tok < 0 || static_cast<std::size_t>(tok) >= scorer.vocab_size())
      throw InvalidDistribution("target token " + std::to_string(tok) + " outside vocab");
    double p = dist[tok];
    if (p <= 0.0) throw ZeroProbabilityToken(i);
    nll -= std::log(p);
  }
  return nll;
}

}  // namespace binprobe
