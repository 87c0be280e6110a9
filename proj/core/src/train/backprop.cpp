#include "tapverify/train/backprop.hpp"

#include <cmath>

#include "tapverify/error.hpp"

namespace tapverify::train {

using numcore::MeterContext;
using numcore::Tensor;

void accumulate(Tensor& dst, const Tensor& src) {
  if (dst.size() != src.size()) {
    throw ShapeError("accumulate: " + numcore::shape_to_string(dst.shape()) + " vs " +
                     numcore::shape_to_string(src.shape()));
  }
  auto d = dst.data();
  const auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

Tensor column_sums(const Tensor& x) {
  Tensor out({x.cols()});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
  return out;
}

Tensor linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw,
                       Tensor* db, MeterContext& ctx) {
  accumulate(dw, numcore::matmul_tn(x, dy, ctx));
  if (db != nullptr) accumulate(*db, column_sums(dy));
  return numcore::matmul_nt(dy, w, ctx);
}

Tensor gelu_backward(const Tensor& pre, const Tensor& dy) {
  Tensor out(dy.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = dy[i] * numcore::gelu_derivative(pre[i]);
  }
  return out;
}

Tensor layer_norm_backward(const numcore::LayerNormTrace& trace, const Tensor& gamma,
                           const Tensor& dy, Tensor& dgamma, Tensor& dbeta) {
  const Tensor& xhat = trace.normalized;
  const std::size_t rows = xhat.rows(), width = xhat.cols();
  Tensor dx(xhat.shape());
  std::vector<double> dxhat(width);
  for (std::size_t r = 0; r < rows; ++r) {
    double mean_d = 0.0, mean_dx = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      const double g = dy(r, c);
      dgamma[c] += g * xhat(r, c);
      dbeta[c] += g;
      dxhat[c] = g * gamma[c];
      mean_d += dxhat[c];
      mean_dx += dxhat[c] * xhat(r, c);
    }
    mean_d /= static_cast<double>(width);
    mean_dx /= static_cast<double>(width);
    for (std::size_t c = 0; c < width; ++c) {
      dx(r, c) = trace.inv_std[r] * (dxhat[c] - mean_d - xhat(r, c) * mean_dx);
    }
  }
  return dx;
}

Tensor softmax_backward(const Tensor& probs, const Tensor& dy) {
  Tensor dx(probs.shape());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < probs.cols(); ++c) dot += dy(r, c) * probs(r, c);
    for (std::size_t c = 0; c < probs.cols(); ++c) dx(r, c) = probs(r, c) * (dy(r, c) - dot);
  }
  return dx;
}

numcore::BlockParams zero_block_grads(const numcore::BlockParams& params) {
  numcore::BlockParams g = numcore::BlockParams::identity(params.width(), params.mlp_width());
  g.ln1_gamma = Tensor(g.ln1_gamma.shape());
  g.ln2_gamma = Tensor(g.ln2_gamma.shape());
  return g;
}

Tensor attention_block_backward(const numcore::BlockParams& p, const numcore::BlockTrace& t,
                                const Tensor& dy, numcore::BlockParams& g, MeterContext& ctx) {
  // MLP branch: out = a + gelu(LN2(a) W_up + b_up) W_down + b_down.
  Tensor d_act = linear_backward(t.activation, p.w_down, dy, g.w_down, &g.b_down, ctx);
  Tensor d_pre = gelu_backward(t.pre_activation, d_act);
  Tensor d_normed2 = linear_backward(t.normed2, p.w_up, d_pre, g.w_up, &g.b_up, ctx);
  Tensor d_after = layer_norm_backward(t.ln2, p.ln2_gamma, d_normed2, g.ln2_gamma, g.ln2_beta);
  accumulate(d_after, dy);

  // Attention branch: a = x + softmax(Q K^T / sqrt(d)) V W_o.
  Tensor d_context = linear_backward(t.context, p.w_o, d_after, g.w_o, nullptr, ctx);
  Tensor d_probs = numcore::matmul_nt(d_context, t.v, ctx);
  Tensor d_v = numcore::matmul_tn(t.probs, d_context, ctx);
  Tensor d_scores = softmax_backward(t.probs, d_probs);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(p.width()));
  for (double& v : d_scores.data()) v *= inv_sqrt_d;
  Tensor d_q = numcore::matmul(d_scores, t.k, ctx);
  Tensor d_k = numcore::matmul_tn(d_scores, t.q, ctx);

  Tensor d_normed1 = linear_backward(t.normed1, p.w_q, d_q, g.w_q, nullptr, ctx);
  accumulate(d_normed1, linear_backward(t.normed1, p.w_k, d_k, g.w_k, nullptr, ctx));
  accumulate(d_normed1, linear_backward(t.normed1, p.w_v, d_v, g.w_v, nullptr, ctx));
  Tensor dx = layer_norm_backward(t.ln1, p.ln1_gamma, d_normed1, g.ln1_gamma, g.ln1_beta);
  accumulate(dx, d_after);
  return dx;
}

}  // namespace tapverify::train
