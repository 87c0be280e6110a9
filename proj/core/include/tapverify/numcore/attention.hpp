#pragma once

#include <cstddef>

#include "tapverify/numcore/kernels.hpp"
#include "tapverify/numcore/random.hpp"

namespace tapverify::numcore {

// Weights of one pre-norm transformer block with single-head attention and
// a two-layer GELU MLP. Projections have no bias; the MLP layers do.
struct BlockParams {
  Tensor ln1_gamma, ln1_beta;  // [d]
  Tensor w_q, w_k, w_v, w_o;   // [d x d]
  Tensor ln2_gamma, ln2_beta;  // [d]
  Tensor w_up, b_up;           // [d x m], [m]
  Tensor w_down, b_down;       // [m x d], [d]

  std::size_t width() const { return w_q.rows(); }
  std::size_t mlp_width() const { return w_up.cols(); }

  // Unit layer-norm gains, everything else zero: the block is an identity.
  static BlockParams identity(std::size_t width, std::size_t mlp_width);
  // Gaussian projections with stddev `scale / sqrt(fan_in)`.
  static BlockParams random(std::size_t width, std::size_t mlp_width, double scale,
                            Rng& rng);

  template <typename F>
  void for_each(F&& f) {
    f("ln1_gamma", ln1_gamma); f("ln1_beta", ln1_beta);
    f("w_q", w_q); f("w_k", w_k); f("w_v", w_v); f("w_o", w_o);
    f("ln2_gamma", ln2_gamma); f("ln2_beta", ln2_beta);
    f("w_up", w_up); f("b_up", b_up); f("w_down", w_down); f("b_down", b_down);
  }
  template <typename F>
  void for_each(F&& f) const {
    f("ln1_gamma", ln1_gamma); f("ln1_beta", ln1_beta);
    f("w_q", w_q); f("w_k", w_k); f("w_v", w_v); f("w_o", w_o);
    f("ln2_gamma", ln2_gamma); f("ln2_beta", ln2_beta);
    f("w_up", w_up); f("b_up", b_up); f("w_down", w_down); f("b_down", b_down);
  }
};

// Forward intermediates needed by the backward pass.
struct BlockTrace {
  Tensor input;
  LayerNormTrace ln1;
  Tensor normed1, q, k, v, probs, context;
  Tensor after_attention;
  LayerNormTrace ln2;
  Tensor normed2, pre_activation, activation;
};

// y = x1 + W_down gelu(W_up LN2(x1) + b_up) + b_down,
// x1 = x + W_o softmax(Q K^T / sqrt(d)) V with Q, K, V from LN1(x).
Tensor attention_block(const Tensor& x, const BlockParams& params, MeterContext& ctx,
                       BlockTrace* trace = nullptr);

}  // namespace tapverify::numcore
