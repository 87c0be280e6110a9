#include "tapverify/numcore/attention.hpp"

#include <cmath>
#include <string>

#include "tapverify/error.hpp"

namespace tapverify::numcore {

BlockParams BlockParams::identity(std::size_t width, std::size_t mlp_width) {
  BlockParams p;
  p.ln1_gamma = Tensor::full({width}, 1.0);
  p.ln1_beta = Tensor::zeros({width});
  p.w_q = Tensor::zeros({width, width});
  p.w_k = Tensor::zeros({width, width});
  p.w_v = Tensor::zeros({width, width});
  p.w_o = Tensor::zeros({width, width});
  p.ln2_gamma = Tensor::full({width}, 1.0);
  p.ln2_beta = Tensor::zeros({width});
  p.w_up = Tensor::zeros({width, mlp_width});
  p.b_up = Tensor::zeros({mlp_width});
  p.w_down = Tensor::zeros({mlp_width, width});
  p.b_down = Tensor::zeros({width});
  return p;
}

BlockParams BlockParams::random(std::size_t width, std::size_t mlp_width,
                                double scale, Rng& rng) {
  BlockParams p = identity(width, mlp_width);
  const double sd = scale / std::sqrt(static_cast<double>(width));
  const double sd_down = scale / std::sqrt(static_cast<double>(mlp_width));
  p.w_q = rng.normal_tensor({width, width}, sd);
  p.w_k = rng.normal_tensor({width, width}, sd);
  p.w_v = rng.normal_tensor({width, width}, sd);
  p.w_o = rng.normal_tensor({width, width}, sd);
  p.w_up = rng.normal_tensor({width, mlp_width}, sd);
  p.w_down = rng.normal_tensor({mlp_width, width}, sd_down);
  return p;
}

Tensor attention_block(const Tensor& x, const BlockParams& params, MeterContext& ctx,
                       BlockTrace* trace) {
  if (x.rank() != 2 || x.dim(0) == 0) {
    throw ShapeError("attention_block: expected [T x d] input with T >= 1, got " +
                     shape_to_string(x.shape()));
  }
  const std::size_t width = x.dim(1);
  if (params.width() != width) {
    throw ShapeError("attention_block: block width " + std::to_string(params.width()) +
                     " does not match input width " + std::to_string(width));
  }

  LayerNormTrace ln1;
  Tensor normed1 = layer_norm(x, params.ln1_gamma, params.ln1_beta, ctx,
                              trace ? &ln1 : nullptr);
  Tensor q = matmul(normed1, params.w_q, ctx);
  Tensor k = matmul(normed1, params.w_k, ctx);
  Tensor v = matmul(normed1, params.w_v, ctx);
  Tensor scores = scale(matmul_nt(q, k, ctx), 1.0 / std::sqrt(static_cast<double>(width)),
                        ctx);
  Tensor probs = softmax_rows(scores, ctx);
  Tensor context = matmul(probs, v, ctx);
  Tensor after_attention = add(x, matmul(context, params.w_o, ctx), ctx);

  LayerNormTrace ln2;
  Tensor normed2 = layer_norm(after_attention, params.ln2_gamma, params.ln2_beta, ctx,
                              trace ? &ln2 : nullptr);
  Tensor pre_activation = linear(normed2, params.w_up, params.b_up, ctx);
  Tensor activation = gelu(pre_activation, ctx);
  Tensor out = add(after_attention, linear(activation, params.w_down, params.b_down, ctx),
                   ctx);

  if (trace) {
    trace->input = x;
    trace->ln1 = std::move(ln1);
    trace->normed1 = std::move(normed1);
    trace->q = std::move(q);
    trace->k = std::move(k);
    trace->v = std::move(v);
    trace->probs = std::move(probs);
    trace->context = std::move(context);
    trace->after_attention = std::move(after_attention);
    trace->ln2 = std::move(ln2);
    trace->normed2 = std::move(normed2);
    trace->pre_activation = std::move(pre_activation);
    trace->activation = std::move(activation);
  }
  return out;
}

}  // namespace tapverify::numcore
