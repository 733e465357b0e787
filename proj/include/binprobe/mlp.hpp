#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "binprobe/errors.hpp"

namespace binprobe {

enum class Activation { Identity, Tanh, Gelu };

namespace detail {

inline double act_value(Activation a, double x) {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Gelu: return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
  }
  return x;
}

inline double act_derivative(Activation a, double x) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Gelu: {
      double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
      return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * phi;
    }
  }
  return 1.0;
}

}  // namespace detail

/// Two-layer perceptron applied row-wise: y = W2 * act(W1 * x + b1) + b2.
/// Projects token embeddings from the binary space into the source space.
class ProjectionMlp {
 public:
  ProjectionMlp() = default;
  ProjectionMlp(Eigen::MatrixXd w1, Eigen::VectorXd b1, Eigen::MatrixXd w2, Eigen::VectorXd b2,
                Activation act = Activation::Gelu)
      : w1_(std::move(w1)), b1_(std::move(b1)), w2_(std::move(w2)), b2_(std::move(b2)), act_(act) {
    if (b1_.size() != w1_.rows() || w2_.cols() != w1_.rows() || b2_.size() != w2_.rows())
      throw DimensionMismatch("projection mlp layer shapes are inconsistent");
  }

  static ProjectionMlp random_init(Eigen::Index in_dim, Eigen::Index hidden_dim,
                                   Eigen::Index out_dim, std::uint64_t seed,
                                   Activation act = Activation::Gelu) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    Eigen::MatrixXd w1(hidden_dim, in_dim), w2(out_dim, hidden_dim);
    for (Eigen::Index r = 0; r < hidden_dim; ++r)
      for (Eigen::Index c = 0; c < in_dim; ++c) w1(r, c) = unit() / std::sqrt(double(in_dim));
    for (Eigen::Index r = 0; r < out_dim; ++r)
      for (Eigen::Index c = 0; c < hidden_dim; ++c) w2(r, c) = unit() / std::sqrt(double(hidden_dim));
    return ProjectionMlp(std::move(w1), Eigen::VectorXd::Zero(hidden_dim), std::move(w2),
                         Eigen::VectorXd::Zero(out_dim), act);
  }

  Eigen::Index input_dim() const { return w1_.cols(); }
  Eigen::Index hidden_dim() const { return w1_.rows(); }
  Eigen::Index output_dim() const { return w2_.rows(); }
  Activation activation() const { return act_; }
  const Eigen::MatrixXd& w1() const { return w1_; }
  const Eigen::VectorXd& b1() const { return b1_; }
  const Eigen::MatrixXd& w2() const { return w2_; }
  const Eigen::VectorXd& b2() const { return b2_; }
  Eigen::MatrixXd& w1() { return w1_; }
  Eigen::VectorXd& b1() { return b1_; }
  Eigen::MatrixXd& w2() { return w2_; }
  Eigen::VectorXd& b2() { return b2_; }

  /// rows of `z` are token embeddings; returns one projected row per input row.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& z) const {
    check_input(z);
    Eigen::MatrixXd pre = (w1_ * z.transpose()).colwise() + b1_;  // hidden x rows
    Eigen::MatrixXd hid = pre.unaryExpr([this](double x) { return detail::act_value(act_, x); });
    Eigen::MatrixXd out = (w2_ * hid).colwise() + b2_;
    return out.transpose();
  }

  /// Directional derivative of forward(z) along dz (Jacobian-vector product).
  Eigen::MatrixXd forward_jvp(const Eigen::MatrixXd& z, const Eigen::MatrixXd& dz) const {
    check_input(z);
    if (dz.rows() != z.rows() || dz.cols() != z.cols())
      throw DimensionMismatch("jvp perturbation shape differs from input");
    Eigen::MatrixXd pre = (w1_ * z.transpose()).colwise() + b1_;
    Eigen::MatrixXd dpre = w1_ * dz.transpose();
    Eigen::MatrixXd dhid =
        pre.unaryExpr([this](double x) { return detail::act_derivative(act_, x); })
            .cwiseProduct(dpre);
    return (w2_ * dhid).transpose();
  }

  struct Gradients {
    Eigen::MatrixXd input;  // same shape as z
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
  };

  /// Backward pass for upstream gradient `g` (same shape as forward output).
  Gradients backward(const Eigen::MatrixXd& z, const Eigen::MatrixXd& g) const {
    check_input(z);
    if (g.rows() != z.rows() || g.cols() != output_dim())
      throw DimensionMismatch("upstream gradient shape mismatch");
    Eigen::MatrixXd pre = (w1_ * z.transpose()).colwise() + b1_;  // hidden x rows
    Eigen::MatrixXd hid = pre.unaryExpr([this](double x) { return detail::act_value(act_, x); });
    Eigen::MatrixXd gt = g.transpose();  // out x rows
    Gradients grads;
    grads.w2 = gt * hid.transpose();
    grads.b2 = gt.rowwise().sum();
    Eigen::MatrixXd ghid = w2_.transpose() * gt;  // hidden x rows
    Eigen::MatrixXd gpre =
        ghid.cwiseProduct(pre.unaryExpr([this](double x) { return detail::act_derivative(act_, x); }));
    grads.w1 = gpre * z;
    grads.b1 = gpre.rowwise().sum();
    grads.input = (w1_.transpose() * gpre).transpose();
    return grads;
  }

 private:
  void check_input(const Eigen::MatrixXd& z) const {
    if (z.cols() != w1_.cols())
      throw DimensionMismatch("projection input dim " + std::to_string(z.cols()) + " != " +
                              std::to_string(w1_.cols()));
  }

  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;
  Eigen::VectorXd b2_;
  Activation act_ = Activation::Gelu;
};

}  // namespace binprobe
