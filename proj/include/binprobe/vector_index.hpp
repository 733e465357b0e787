#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "binprobe/encoder.hpp"
#include "binprobe/errors.hpp"

namespace binprobe {

namespace detail {
constexpr char kIndexMagic[8] = {'B', 'P', 'I', 'D', 'X', 'v', '0', '1'};
}

struct IndexEntry {
  std::string id;
  Eigen::VectorXd vector;
  std::string payload;
};

struct QueryHit {
  std::string id;
  double score = 0.0;
  std::string payload;
};

struct RecallQuery {
  Eigen::VectorXd vector;
  std::string gold_id;
};

/// Exact brute-force dense index over unit vectors. Immutable after build;
/// queries are read-only and safe to run concurrently.
class VectorIndex {
 public:
  VectorIndex() = default;

  static VectorIndex build(std::vector<IndexEntry> items) {
    VectorIndex index;
    if (items.empty()) return index;
    index.dimension_ = items.front().vector.size();
    std::unordered_set<std::string> seen;
    index.ids_.reserve(items.size());
    index.payloads_.reserve(items.size());
    index.matrix_.resize(static_cast<Eigen::Index>(items.size()), index.dimension_);
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto& it = items[i];
      if (it.vector.size() != index.dimension_)
        throw DimensionMismatch("entry '" + it.id + "' has dimension " +
                                std::to_string(it.vector.size()) + ", expected " +
                                std::to_string(index.dimension_));
      if (!seen.insert(it.id).second) throw DuplicateId(it.id);
      double n = it.vector.norm();
      if (n == 0.0) throw Error("entry '" + it.id + "' has a zero vector");
      index.matrix_.row(static_cast<Eigen::Index>(i)) = it.vector / n;
      index.ids_.push_back(std::move(it.id));
      index.payloads_.push_back(std::move(it.payload));
    }
    return index;
  }

  std::size_t size() const { return ids_.size(); }
  Eigen::Index dimension() const { return dimension_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& payload(std::size_t i) const { return payloads_[i]; }
  Eigen::VectorXd vector(std::size_t i) const {
    return matrix_.row(static_cast<Eigen::Index>(i));
  }

  std::vector<QueryHit> query_topk(const Eigen::VectorXd& q, std::size_t k) const {
    if (size() == 0 || k == 0) return {};
    if (q.size() != dimension_)
      throw DimensionMismatch("query dimension " + std::to_string(q.size()) + ", index " +
                              std::to_string(dimension_));
    Eigen::VectorXd qn = q;
    double n = qn.norm();
    if (n > 0.0) qn /= n;
    Eigen::VectorXd scores = matrix_ * qn;
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::size_t a, std::size_t b) {
      if (scores[static_cast<Eigen::Index>(a)] != scores[static_cast<Eigen::Index>(b)])
        return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
      return ids_[a] < ids_[b];
    };
    std::size_t take = std::min(k, size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      better);
    std::vector<QueryHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
      hits.push_back({ids_[order[i]], scores[static_cast<Eigen::Index>(order[i])],
                      payloads_[order[i]]});
    return hits;
  }

  double recall_at_k(const std::vector<RecallQuery>& queries, std::size_t k) const {
    if (queries.empty()) throw InsufficientData("recall@k over zero queries is undefined");
    std::unordered_set<std::string> known(ids_.begin(), ids_.end());
    for (const auto& q : queries)
      if (!known.count(q.gold_id)) throw UnknownGoldId(q.gold_id);
    std::size_t hits = 0;
    for (const auto& q : queries) {
      for (const auto& hit : query_topk(q.vector, k))
        if (hit.id == q.gold_id) {
          ++hits;
          break;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(queries.size());
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.write(detail::kIndexMagic, 8);
    detail::write_u32(out, 1);  // version
    detail::write_u32(out, static_cast<std::uint32_t>(dimension_));
    detail::write_u32(out, static_cast<std::uint32_t>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
      detail::write_u32(out, static_cast<std::uint32_t>(ids_[i].size()));
      out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
      for (Eigen::Index c = 0; c < dimension_; ++c)
        detail::write_f32(out, static_cast<float>(matrix_(static_cast<Eigen::Index>(i), c)));
      detail::write_u32(out, static_cast<std::uint32_t>(payloads_[i].size()));
      out.write(payloads_[i].data(), static_cast<std::streamsize>(payloads_[i].size()));
    }
    if (!out) throw Error("write failed for " + path);
  }

  static VectorIndex load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::kIndexMagic, 8) != 0)
      throw CacheCorruption("bad index magic in " + path);
    std::uint32_t version = detail::read_u32(in);
    if (version != 1) throw CacheCorruption("unsupported index version in " + path);
    std::uint32_t dim = detail::read_u32(in);
    std::uint32_t count = detail::read_u32(in);
    std::vector<IndexEntry> items;
    items.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      std::uint32_t id_len = detail::read_u32(in);
      if (!in || id_len > (1u << 20)) throw CacheCorruption("bad id length in " + path);
      std::string id(id_len, '\0');
      in.read(id.data(), id_len);
      Eigen::VectorXd v(dim);
      for (std::uint32_t c = 0; c < dim; ++c) v[static_cast<Eigen::Index>(c)] = detail::read_f32(in);
      std::uint32_t pl_len = detail::read_u32(in);
      if (!in || pl_len > (1u << 28)) throw CacheCorruption("bad payload length in " + path);
      std::string payload(pl_len, '\0');
      in.read(payload.data(), pl_len);
      if (!in) throw CacheCorruption("truncated index file " + path);
      items.push_back({std::move(id), std::move(v), std::move(payload)});
    }
    return build(std::move(items));
  }

 private:
  Eigen::Index dimension_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::string> payloads_;
  Eigen::MatrixXd matrix_;  // rows are unit vectors, in insertion order
};

}  // namespace binprobe
