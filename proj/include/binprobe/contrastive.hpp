#pragma once

#include <Eigen/Dense>
#include <deque>
#include <vector>

#include "binprobe/encoder.hpp"
#include "binprobe/errors.hpp"

namespace binprobe {

struct ContrastiveResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_asm;  // N x d, d loss / d asm embedding rows
  Eigen::MatrixXd grad_src;  // N x d
};

namespace detail {

inline Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    Eigen::ArrayXd e = (logits.row(i).array() - mx).exp();
    p.row(i) = (e / e.sum()).matrix();
  }
  return p;
}

inline double row_logsumexp(const Eigen::RowVectorXd& row) {
  double mx = row.maxCoeff();
  return mx + std::log((row.array() - mx).exp().sum());
}

}  // namespace detail

/// Symmetric InfoNCE over a batch of aligned embedding rows, averaged over the
/// batch: L = (L_a2s + L_s2a) / 2, each direction contrasting the in-batch
/// positive against the other batch rows plus the queued negatives for that
/// direction. Queue rows contribute to the denominators only; gradients are
/// returned for the batch rows.
inline ContrastiveResult contrastive_loss(const Eigen::MatrixXd& asm_emb,
                                          const Eigen::MatrixXd& src_emb,
                                          const Eigen::MatrixXd& src_queue,
                                          const Eigen::MatrixXd& asm_queue,
                                          double temperature = 1.0) {
  const Eigen::Index n = asm_emb.rows();
  const Eigen::Index d = asm_emb.cols();
  if (n == 0) throw EmptyBatch("contrastive_loss: empty batch");
  if (src_emb.rows() != n || src_emb.cols() != d)
    throw DimensionMismatch("contrastive_loss: batch shapes differ");
  if (src_queue.size() > 0 && src_queue.cols() != d)
    throw DimensionMismatch("contrastive_loss: src queue dimension");
  if (asm_queue.size() > 0 && asm_queue.cols() != d)
    throw DimensionMismatch("contrastive_loss: asm queue dimension");
  if (!(temperature > 0.0)) throw ConfigError("contrastive_loss: temperature must be positive");

  const double inv_t = 1.0 / temperature;
  const Eigen::Index qs = src_queue.rows();
  const Eigen::Index qa = asm_queue.rows();

  Eigen::MatrixXd logits_a2s(n, n + qs);
  logits_a2s.leftCols(n).noalias() = asm_emb * src_emb.transpose() * inv_t;
  if (qs > 0) logits_a2s.rightCols(qs).noalias() = asm_emb * src_queue.transpose() * inv_t;

  Eigen::MatrixXd logits_s2a(n, n + qa);
  logits_s2a.leftCols(n).noalias() = src_emb * asm_emb.transpose() * inv_t;
  if (qa > 0) logits_s2a.rightCols(qa).noalias() = src_emb * asm_queue.transpose() * inv_t;

  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    loss += -logits_a2s(i, i) + detail::row_logsumexp(logits_a2s.row(i));
    loss += -logits_s2a(i, i) + detail::row_logsumexp(logits_s2a.row(i));
  }
  loss /= 2.0 * static_cast<double>(n);

  Eigen::MatrixXd p_a2s = detail::row_softmax(logits_a2s);
  Eigen::MatrixXd p_s2a = detail::row_softmax(logits_s2a);

  const double scale = inv_t / (2.0 * static_cast<double>(n));
  Eigen::MatrixXd grad_asm = p_a2s.leftCols(n) * src_emb;
  if (qs > 0) grad_asm.noalias() += p_a2s.rightCols(qs) * src_queue;
  grad_asm.noalias() += p_s2a.leftCols(n).transpose() * src_emb;
  grad_asm.noalias() -= 2.0 * src_emb;
  grad_asm *= scale;

  Eigen::MatrixXd grad_src = p_s2a.leftCols(n) * asm_emb;
  if (qa > 0) grad_src.noalias() += p_s2a.rightCols(qa) * asm_queue;
  grad_src.noalias() += p_a2s.leftCols(n).transpose() * asm_emb;
  grad_src.noalias() -= 2.0 * asm_emb;
  grad_src *= scale;

  return {loss, std::move(grad_asm), std::move(grad_src)};
}

/// Momentum (EMA) copy of one encoder plus its FIFO queue of key embeddings.
class MomentumState {
 public:
  MomentumState() = default;
  MomentumState(LinearEncoder key_encoder, std::size_t capacity, double momentum)
      : key_encoder_(std::move(key_encoder)), capacity_(capacity), momentum_(momentum) {
    if (momentum < 0.0 || momentum >= 1.0)
      throw ConfigError("momentum must lie in [0, 1)");
  }

  const LinearEncoder& key_encoder() const { return key_encoder_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t queue_size() const { return queue_.size(); }

  void update_weights(const LinearEncoder& query_encoder) {
    if (query_encoder.weight().rows() != key_encoder_.weight().rows() ||
        query_encoder.weight().cols() != key_encoder_.weight().cols())
      throw DimensionMismatch("momentum update: weight shapes differ");
    key_encoder_.weight() =
        momentum_ * key_encoder_.weight() + (1.0 - momentum_) * query_encoder.weight();
  }

  void enqueue(const Eigen::VectorXd& key) {
    if (capacity_ == 0) return;
    queue_.push_back(key);
    while (queue_.size() > capacity_) queue_.pop_front();
  }

  /// Queue contents as rows, oldest first. Empty 0 x d matrix when empty.
  Eigen::MatrixXd queue_matrix(Eigen::Index dim) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(queue_.size()), dim);
    for (std::size_t i = 0; i < queue_.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = queue_[i];
    return m;
  }

 private:
  LinearEncoder key_encoder_;
  std::deque<Eigen::VectorXd> queue_;
  std::size_t capacity_ = 0;
  double momentum_ = 0.999;
};

}  // namespace binprobe
