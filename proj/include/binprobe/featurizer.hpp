#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "binprobe/strutil.hpp"

namespace binprobe {

enum class SpaceTag : std::uint8_t { Binary = 0, Source = 1, Signature = 2 };

/// Identifier-run tokenization shared by both embedding spaces: runs of
/// [A-Za-z0-9_], punctuation dropped.
inline std::vector<std::string> tokenize_code(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_ident_char(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// Dense token->index map; index `size()` is reserved for out-of-vocabulary
/// tokens, so feature dimension is size() + 1.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary build(const std::vector<std::string>& texts, std::size_t max_tokens = 0) {
    // order by frequency, ties by first appearance, for a deterministic map
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // count, first_pos
    std::size_t pos = 0;
    for (const auto& text : texts) {
      for (auto& tok : tokenize_code(text)) {
        auto [it, inserted] = stats.try_emplace(std::move(tok), std::make_pair(0, pos));
        ++it->second.first;
        ++pos;
      }
    }
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ordered(stats.begin(),
                                                                                     stats.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
      if (a.second.first != b.second.first) return a.second.first > b.second.first;
      return a.second.second < b.second.second;
    });
    if (max_tokens > 0 && ordered.size() > max_tokens) ordered.resize(max_tokens);
    Vocabulary v;
    for (auto& [tok, st] : ordered) v.add(tok);
    return v;
  }

  std::size_t add(const std::string& token) {
    auto [it, inserted] = index_.try_emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  std::size_t size() const { return tokens_.size(); }
  std::size_t dimension() const { return tokens_.size() + 1; }
  std::size_t oov_index() const { return tokens_.size(); }

  std::optional<std::size_t> lookup(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> tokens_;
};

/// Sparse bag-of-tokens counts, sorted by feature index.
using SparseCounts = std::vector<std::pair<std::size_t, double>>;

inline SparseCounts featurize(std::string_view text, const Vocabulary& vocab) {
  std::map<std::size_t, double> acc;
  for (const auto& tok : tokenize_code(text)) {
    auto idx = vocab.lookup(tok);
    acc[idx ? *idx : vocab.oov_index()] += 1.0;
  }
  return SparseCounts(acc.begin(), acc.end());
}

}  // namespace binprobe
