#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "binprobe/contrastive.hpp"
#include "binprobe/encoder.hpp"
#include "binprobe/errors.hpp"

namespace binprobe {

struct AlignedPair {
  std::string asm_text;
  std::string src_text;
};

struct TrainConfig {
  Eigen::Index embedding_dim = 128;
  double learning_rate = 5e-5;
  std::size_t batch_size = 16;
  std::size_t total_steps = 17000;
  std::size_t warmup_steps = 1000;
  std::size_t queue_capacity = 4096;
  double momentum = 0.999;
  double temperature = 1.0;
  bool queue_both_directions = true;
  std::size_t max_vocab = 0;  // 0 = unbounded
  std::uint64_t seed = 0;
};

struct TrainResult {
  LinearEncoder asm_encoder;
  LinearEncoder src_encoder;
  std::vector<double> loss_trace;  // one entry per optimizer step
};

namespace detail {

inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Eigen::MatrixXd random_weight(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = (uniform_unit(rng) * 2.0 - 1.0) * 0.1;
  return w;
}

/// Chain rule through u = v / |v|: dL/dv = (g - (g.u) u) / |v|, zero when v = 0.
inline Eigen::VectorXd grad_through_normalize(const Eigen::VectorXd& raw,
                                              const Eigen::VectorXd& unit,
                                              const Eigen::VectorXd& grad_unit) {
  double norm = raw.norm();
  if (norm == 0.0) return Eigen::VectorXd::Zero(raw.size());
  return (grad_unit - grad_unit.dot(unit) * unit) / norm;
}

}  // namespace detail

/// MoCo-style trainer for the aligned dual encoder: SGD with linear warmup on
/// the two query encoders, EMA key encoders feeding fixed-size FIFO negative
/// queues. Deterministic for a given seed.
inline TrainResult train_dual_encoder(const std::vector<AlignedPair>& pairs,
                                      const TrainConfig& cfg) {
  if (pairs.size() < 2)
    throw InsufficientData("need at least 2 aligned pairs, got " + std::to_string(pairs.size()));
  if (cfg.batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (cfg.embedding_dim <= 0) throw ConfigError("embedding_dim must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");

  std::vector<std::string> asm_texts, src_texts;
  asm_texts.reserve(pairs.size());
  src_texts.reserve(pairs.size());
  for (const auto& p : pairs) {
    asm_texts.push_back(p.asm_text);
    src_texts.push_back(p.src_text);
  }
  Vocabulary asm_vocab = Vocabulary::build(asm_texts, cfg.max_vocab);
  Vocabulary src_vocab = Vocabulary::build(src_texts, cfg.max_vocab);

  std::mt19937_64 rng(cfg.seed);
  LinearEncoder asm_enc(asm_vocab,
                        detail::random_weight(cfg.embedding_dim,
                                              static_cast<Eigen::Index>(asm_vocab.dimension()), rng),
                        SpaceTag::Binary);
  LinearEncoder src_enc(src_vocab,
                        detail::random_weight(cfg.embedding_dim,
                                              static_cast<Eigen::Index>(src_vocab.dimension()), rng),
                        SpaceTag::Source);

  std::vector<SparseCounts> asm_feats(pairs.size()), src_feats(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    asm_feats[i] = featurize(pairs[i].asm_text, asm_vocab);
    src_feats[i] = featurize(pairs[i].src_text, src_vocab);
  }

  MomentumState asm_keys(asm_enc, cfg.queue_capacity, cfg.momentum);
  MomentumState src_keys(src_enc, cfg.queue_capacity, cfg.momentum);

  const std::size_t batch = std::min(cfg.batch_size, pairs.size());
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();  // forces shuffle before the first batch

  std::vector<double> trace;
  trace.reserve(cfg.total_steps);

  for (std::size_t step = 0; step < cfg.total_steps; ++step) {
    std::vector<std::size_t> idx(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor >= order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) {
          std::size_t j = rng() % i;
          std::swap(order[i - 1], order[j]);
        }
        cursor = 0;
      }
      idx[b] = order[cursor++];
    }

    const Eigen::Index n = static_cast<Eigen::Index>(batch);
    Eigen::MatrixXd asm_raw(n, cfg.embedding_dim), src_raw(n, cfg.embedding_dim);
    Eigen::MatrixXd asm_unit(n, cfg.embedding_dim), src_unit(n, cfg.embedding_dim);
    for (Eigen::Index b = 0; b < n; ++b) {
      asm_raw.row(b) = asm_enc.raw_embed(asm_feats[idx[b]]);
      src_raw.row(b) = src_enc.raw_embed(src_feats[idx[b]]);
      double na = asm_raw.row(b).norm(), ns = src_raw.row(b).norm();
      asm_unit.row(b) = na > 0.0 ? (asm_raw.row(b) / na).eval() : asm_raw.row(b);
      src_unit.row(b) = ns > 0.0 ? (src_raw.row(b) / ns).eval() : src_raw.row(b);
    }

    Eigen::MatrixXd src_queue = src_keys.queue_matrix(cfg.embedding_dim);
    Eigen::MatrixXd asm_queue = cfg.queue_both_directions
                                    ? asm_keys.queue_matrix(cfg.embedding_dim)
                                    : Eigen::MatrixXd(0, cfg.embedding_dim);

    ContrastiveResult res =
        contrastive_loss(asm_unit, src_unit, src_queue, asm_queue, cfg.temperature);
    trace.push_back(res.loss);

    double lr = cfg.learning_rate;
    if (cfg.warmup_steps > 0)
      lr *= std::min(1.0, static_cast<double>(step + 1) / static_cast<double>(cfg.warmup_steps));

    for (Eigen::Index b = 0; b < n; ++b) {
      Eigen::VectorXd dva = detail::grad_through_normalize(asm_raw.row(b), asm_unit.row(b),
                                                           res.grad_asm.row(b));
      Eigen::VectorXd dvs = detail::grad_through_normalize(src_raw.row(b), src_unit.row(b),
                                                           res.grad_src.row(b));
      for (const auto& [t, c] : asm_feats[idx[b]])
        asm_enc.weight().col(static_cast<Eigen::Index>(t)) -= lr * c * dva;
      for (const auto& [t, c] : src_feats[idx[b]])
        src_enc.weight().col(static_cast<Eigen::Index>(t)) -= lr * c * dvs;
    }

    asm_keys.update_weights(asm_enc);
    src_keys.update_weights(src_enc);
    for (Eigen::Index b = 0; b < n; ++b) {
      src_keys.enqueue(src_keys.key_encoder().encode_counts(src_feats[idx[b]]).values);
      if (cfg.queue_both_directions)
        asm_keys.enqueue(asm_keys.key_encoder().encode_counts(asm_feats[idx[b]]).values);
    }
  }

  return {std::move(asm_enc), std::move(src_enc), std::move(trace)};
}

inline void save_loss_trace(const std::vector<double>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "step,loss\n";
  char buf[40];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", trace[i]);
    out << i << ',' << buf << '\n';
  }
}

inline std::vector<double> load_loss_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "step,loss")
    throw CacheCorruption("bad loss trace header in " + path);
  std::vector<double> trace;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw CacheCorruption("bad loss trace row in " + path);
    if (std::stoull(line.substr(0, comma)) != expected)
      throw CacheCorruption("non-sequential step in " + path);
    trace.push_back(std::stod(line.substr(comma + 1)));
    ++expected;
  }
  return trace;
}

}  // namespace binprobe
