#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "binprobe/dual_trainer.hpp"
#include "binprobe/errors.hpp"

namespace binprobe {

/// Separable-by-construction paired corpus: disjoint token clusters, each item
/// a small token subset drawn from one cluster, with corresponding asm/src
/// token inventories ("a_<c>_<t>" pairs with "s_<c>_<t>"). Held-out items are
/// unseen subsets of trained tokens, so a bag-of-tokens dual encoder must
/// generalize compositionally to retrieve them.
struct SyntheticSpec {
  std::size_t clusters = 8;
  std::size_t tokens_per_cluster = 24;
  std::size_t items = 1000;
  std::size_t tokens_per_item = 4;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<std::string> ids;
  std::vector<AlignedPair> pairs;
};

inline SyntheticCorpus make_clustered_corpus(const SyntheticSpec& spec) {
  if (spec.clusters == 0 || spec.tokens_per_cluster == 0 || spec.tokens_per_item == 0)
    throw ConfigError("synthetic corpus parameters must be positive");
  if (spec.tokens_per_item > spec.tokens_per_cluster)
    throw ConfigError("tokens_per_item exceeds tokens_per_cluster");

  std::mt19937_64 rng(spec.seed);
  std::vector<std::set<std::vector<std::size_t>>> used(spec.clusters);
  SyntheticCorpus corpus;
  corpus.ids.reserve(spec.items);
  corpus.pairs.reserve(spec.items);

  for (std::size_t i = 0; i < spec.items; ++i) {
    std::size_t cluster = i % spec.clusters;
    std::vector<std::size_t> subset;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      std::set<std::size_t> picked;
      while (picked.size() < spec.tokens_per_item)
        picked.insert(rng() % spec.tokens_per_cluster);
      subset.assign(picked.begin(), picked.end());
      if (used[cluster].insert(subset).second) break;
      subset.clear();
    }
    if (subset.empty())
      throw ConfigError("cluster " + std::to_string(cluster) +
                        " cannot supply more distinct token subsets");
    std::string asm_text, src_text;
    for (std::size_t t : subset) {
      if (!asm_text.empty()) {
        asm_text.push_back(' ');
        src_text.push_back(' ');
      }
      asm_text += "a_" + std::to_string(cluster) + "_" + std::to_string(t);
      src_text += "s_" + std::to_string(cluster) + "_" + std::to_string(t);
    }
    corpus.ids.push_back("syn_" + std::to_string(cluster) + "_" + std::to_string(i));
    corpus.pairs.push_back({std::move(asm_text), std::move(src_text)});
  }
  return corpus;
}

}  // namespace binprobe
