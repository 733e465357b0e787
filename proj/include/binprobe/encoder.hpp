#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "binprobe/errors.hpp"
#include "binprobe/featurizer.hpp"

namespace binprobe {

struct EmbeddingVector {
  Eigen::VectorXd values;
  bool normalized = false;
};

inline EmbeddingVector normalize(const Eigen::VectorXd& v) {
  double n = v.norm();
  if (n == 0.0) return {v, false};
  return {v / n, true};
}

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size())
    throw DimensionMismatch("cosine_similarity: " + std::to_string(a.values.size()) + " vs " +
                            std::to_string(b.values.size()));
  double na = a.normalized ? 1.0 : a.values.norm();
  double nb = b.normalized ? 1.0 : b.values.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.values.dot(b.values) / (na * nb);
}

/// Bag-of-tokens linear encoder: embed(text) = normalize(W * counts(text)).
/// Columns of W are per-token embeddings; last column holds the OOV slot.
class LinearEncoder {
 public:
  LinearEncoder() = default;
  LinearEncoder(Vocabulary vocab, Eigen::MatrixXd weight, SpaceTag tag)
      : vocab_(std::move(vocab)), weight_(std::move(weight)), tag_(tag) {
    if (static_cast<std::size_t>(weight_.cols()) != vocab_.dimension())
      throw DimensionMismatch("encoder weight cols " + std::to_string(weight_.cols()) +
                              " != vocabulary dimension " + std::to_string(vocab_.dimension()));
  }

  const Vocabulary& vocab() const { return vocab_; }
  Eigen::MatrixXd& weight() { return weight_; }
  const Eigen::MatrixXd& weight() const { return weight_; }
  SpaceTag space() const { return tag_; }
  Eigen::Index dimension() const { return weight_.rows(); }

  Eigen::VectorXd raw_embed(const SparseCounts& counts) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(weight_.rows());
    for (const auto& [idx, count] : counts) v += count * weight_.col(static_cast<Eigen::Index>(idx));
    return v;
  }

  EmbeddingVector encode_counts(const SparseCounts& counts) const {
    return normalize(raw_embed(counts));
  }

  EmbeddingVector encode(std::string_view text) const {
    return encode_counts(featurize(text, vocab_));
  }

 private:
  Vocabulary vocab_;
  Eigen::MatrixXd weight_;
  SpaceTag tag_ = SpaceTag::Binary;
};

namespace detail {

constexpr char kEncoderMagic[8] = {'B', 'P', 'E', 'N', 'C', 'v', '0', '1'};

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

inline float read_f32(std::istream& in) {
  std::uint32_t bits = read_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace detail

inline void save_encoder(const LinearEncoder& enc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(detail::kEncoderMagic, sizeof(detail::kEncoderMagic));
  out.put(static_cast<char>(enc.space()));
  detail::write_u32(out, static_cast<std::uint32_t>(enc.dimension()));
  detail::write_u32(out, static_cast<std::uint32_t>(enc.weight().cols()));
  detail::write_u32(out, static_cast<std::uint32_t>(enc.vocab().size()));
  for (const auto& tok : enc.vocab().tokens()) {
    detail::write_u32(out, static_cast<std::uint32_t>(tok.size()));
    out.write(tok.data(), static_cast<std::streamsize>(tok.size()));
  }
  // weights row-major f32
  for (Eigen::Index r = 0; r < enc.weight().rows(); ++r)
    for (Eigen::Index c = 0; c < enc.weight().cols(); ++c)
      detail::write_f32(out, static_cast<float>(enc.weight()(r, c)));
  if (!out) throw Error("write failed for " + path);
}

inline LinearEncoder load_encoder(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kEncoderMagic, 8) != 0)
    throw CacheCorruption("bad encoder magic in " + path);
  int tag = in.get();
  if (tag < 0 || tag > 2) throw CacheCorruption("bad space tag in " + path);
  std::uint32_t rows = detail::read_u32(in);
  std::uint32_t cols = detail::read_u32(in);
  std::uint32_t vocab_count = detail::read_u32(in);
  if (!in || cols != vocab_count + 1)
    throw CacheCorruption("inconsistent header in " + path);
  Vocabulary vocab;
  for (std::uint32_t i = 0; i < vocab_count; ++i) {
    std::uint32_t len = detail::read_u32(in);
    if (!in || len > (1u << 20)) throw CacheCorruption("bad token length in " + path);
    std::string tok(len, '\0');
    in.read(tok.data(), len);
    if (vocab.add(tok) != i) throw CacheCorruption("duplicate vocabulary token in " + path);
  }
  Eigen::MatrixXd weight(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) weight(r, c) = detail::read_f32(in);
  if (!in) throw CacheCorruption("truncated weights in " + path);
  return LinearEncoder(std::move(vocab), std::move(weight), static_cast<SpaceTag>(tag));
}

}  // namespace binprobe
