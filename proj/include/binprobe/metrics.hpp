#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "binprobe/strutil.hpp"

namespace binprobe {

/// Split an identifier into lowercase tokens: underscores separate, case
/// changes (lower->upper) separate, digits separate from letters, and a run of
/// capitals ends one token before a capital that starts a lowercased word
/// ("parseHTTPResponse" -> parse, http, response).
inline std::vector<std::string> tokenize_name(std::string_view name) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(lowercase(current));
      current.clear();
    }
  };
  for (std::size_t i = 0; i < name.size(); ++i) {
    char c = name[i];
    if (!is_alnum(c)) {
      flush();
      continue;
    }
    if (!current.empty()) {
      char prev = current.back();
      bool boundary = false;
      if (is_digit(prev) != is_digit(c)) boundary = true;
      else if (is_lower(prev) && is_upper(c)) boundary = true;
      else if (is_upper(prev) && is_upper(c) && i + 1 < name.size() && is_lower(name[i + 1]))
        boundary = true;
      if (boundary) flush();
    }
    current.push_back(c);
  }
  flush();
  return tokens;
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Token-set precision/recall/F1 over tokenized names. Set semantics, not
/// multiset: P = |Tg ∩ Tp| / |Tp|, R = |Tg ∩ Tp| / |Tg|.
inline Prf symlm_prf(std::string_view predicted, std::string_view gold) {
  auto pred_tokens = tokenize_name(predicted);
  auto gold_tokens = tokenize_name(gold);
  std::set<std::string> tp(pred_tokens.begin(), pred_tokens.end());
  std::set<std::string> tg(gold_tokens.begin(), gold_tokens.end());
  if (tp.empty() && tg.empty()) return {1.0, 1.0, 1.0};
  if (tp.empty() || tg.empty()) return {0.0, 0.0, 0.0};
  std::size_t inter = 0;
  for (const auto& t : tp) inter += tg.count(t);
  double p = static_cast<double>(inter) / static_cast<double>(tp.size());
  double r = static_cast<double>(inter) / static_cast<double>(tg.size());
  double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return {p, r, f};
}

namespace detail {

inline std::map<std::string, int> char_ngrams(std::string_view s, std::size_t n) {
  std::map<std::string, int> counts;
  if (s.size() >= n)
    for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[std::string(s.substr(i, n))];
  return counts;
}

inline int clipped_overlap(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  int total = 0;
  for (const auto& [gram, count] : a) {
    auto it = b.find(gram);
    if (it != b.end()) total += std::min(count, it->second);
  }
  return total;
}

inline std::string strip_all_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (!is_space(c)) out.push_back(c);
  return out;
}

}  // namespace detail

/// Character n-gram F-score, n = 1..6, beta = 2, on [0,100]. Whitespace is
/// removed before n-gram extraction. Orders where neither side has n-grams are
/// skipped; identical empties score 100, a single empty side scores 0.
inline double chrf(std::string_view candidate, std::string_view reference, std::size_t max_n = 6,
                   double beta = 2.0) {
  std::string cand = detail::strip_all_whitespace(candidate);
  std::string ref = detail::strip_all_whitespace(reference);
  if (cand.empty() && ref.empty()) return 100.0;
  if (cand.empty() || ref.empty()) return 0.0;
  double precision_sum = 0.0, recall_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    auto cg = detail::char_ngrams(cand, n);
    auto rg = detail::char_ngrams(ref, n);
    std::size_t c_total = cand.size() >= n ? cand.size() - n + 1 : 0;
    std::size_t r_total = ref.size() >= n ? ref.size() - n + 1 : 0;
    if (c_total == 0 && r_total == 0) continue;
    int match = detail::clipped_overlap(cg, rg);
    precision_sum += c_total > 0 ? static_cast<double>(match) / static_cast<double>(c_total) : 0.0;
    recall_sum += r_total > 0 ? static_cast<double>(match) / static_cast<double>(r_total) : 0.0;
    ++orders;
  }
  if (orders == 0) return 0.0;
  double p = precision_sum / static_cast<double>(orders);
  double r = recall_sum / static_cast<double>(orders);
  double b2 = beta * beta;
  if (p == 0.0 && r == 0.0) return 0.0;
  return 100.0 * (1.0 + b2) * p * r / (b2 * p + r);
}

/// Character-level BLEU, orders 1..4, on [0,100]. Modified (clipped) n-gram
/// precision with add-one smoothing only where the overlap is zero but the
/// candidate has n-grams; an order the candidate lacks while the reference has
/// it contributes zero precision; orders missing on both sides are skipped.
/// Brevity penalty exp(1 - r/c) applies when the candidate is shorter.
inline double char_bleu(std::string_view candidate, std::string_view reference) {
  if (candidate.empty() && reference.empty()) return 100.0;
  if (candidate.empty() || reference.empty()) return 0.0;
  double log_sum = 0.0;
  std::size_t orders = 0;
  bool zero = false;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t c_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
    std::size_t r_total = reference.size() >= n ? reference.size() - n + 1 : 0;
    if (c_total == 0 && r_total == 0) continue;
    ++orders;
    if (c_total == 0) {
      zero = true;
      continue;
    }
    int match = detail::clipped_overlap(detail::char_ngrams(candidate, n),
                                        detail::char_ngrams(reference, n));
    double p = match > 0 ? static_cast<double>(match) / static_cast<double>(c_total)
                         : 1.0 / static_cast<double>(c_total + 1);
    log_sum += std::log(p);
  }
  if (orders == 0 || zero) return 0.0;
  double geo = std::exp(log_sum / static_cast<double>(orders));
  double bp = candidate.size() >= reference.size()
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(reference.size()) /
                                       static_cast<double>(candidate.size()));
  return 100.0 * bp * geo;
}

namespace detail {

inline std::size_t lcs_length(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

/// LCS F-measure over raw character sequences, on [0,1].
inline double char_rouge_l(std::string_view candidate, std::string_view reference) {
  if (candidate.empty() && reference.empty()) return 1.0;
  if (candidate.empty() || reference.empty()) return 0.0;
  double lcs = static_cast<double>(detail::lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  double p = lcs / static_cast<double>(candidate.size());
  double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

/// Exact-match character alignment METEOR, on [0,1]: each candidate character
/// greedily matches the earliest unmatched identical reference character;
/// F_mean = 10PR/(R+9P); fragmentation penalty 0.5*(chunks/matches)^3, waived
/// for a single chunk so identical strings score exactly 1.
inline double char_meteor(std::string_view candidate, std::string_view reference) {
  if (candidate.empty() && reference.empty()) return 1.0;
  if (candidate.empty() || reference.empty()) return 0.0;
  std::vector<bool> ref_used(reference.size(), false);
  std::vector<std::ptrdiff_t> match_of(candidate.size(), -1);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    for (std::size_t j = 0; j < reference.size(); ++j) {
      if (!ref_used[j] && reference[j] == candidate[i]) {
        ref_used[j] = true;
        match_of[i] = static_cast<std::ptrdiff_t>(j);
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;
  std::size_t chunks = 0;
  std::ptrdiff_t prev_ref = -2;
  bool in_chunk = false;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (match_of[i] < 0) {
      in_chunk = false;
      prev_ref = -2;
      continue;
    }
    if (!in_chunk || match_of[i] != prev_ref + 1) ++chunks;
    in_chunk = true;
    prev_ref = match_of[i];
  }
  double p = static_cast<double>(matches) / static_cast<double>(candidate.size());
  double r = static_cast<double>(matches) / static_cast<double>(reference.size());
  double f_mean = 10.0 * p * r / (r + 9.0 * p);
  double penalty = chunks <= 1 ? 0.0
                               : 0.5 * std::pow(static_cast<double>(chunks) /
                                                    static_cast<double>(matches),
                                                3.0);
  return f_mean * (1.0 - penalty);
}

}  // namespace binprobe
