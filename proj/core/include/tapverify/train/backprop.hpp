#pragma once

#include "tapverify/numcore/attention.hpp"
#include "tapverify/numcore/kernels.hpp"
#include "tapverify/numcore/tensor.hpp"

namespace tapverify::train {

// dst += src, elementwise; shapes must agree.
void accumulate(numcore::Tensor& dst, const numcore::Tensor& src);
// Column sums of an [m x n] matrix as a length-n vector.
numcore::Tensor column_sums(const numcore::Tensor& x);

// y = x w + b. Accumulates dw, db and returns dx.
numcore::Tensor linear_backward(const numcore::Tensor& x, const numcore::Tensor& w,
                                const numcore::Tensor& dy, numcore::Tensor& dw,
                                numcore::Tensor* db, numcore::MeterContext& ctx);

// dy * gelu'(pre)
numcore::Tensor gelu_backward(const numcore::Tensor& pre, const numcore::Tensor& dy);

// y = gamma * xhat + beta. Accumulates dgamma, dbeta and returns dx.
numcore::Tensor layer_norm_backward(const numcore::LayerNormTrace& trace,
                                    const numcore::Tensor& gamma, const numcore::Tensor& dy,
                                    numcore::Tensor& dgamma, numcore::Tensor& dbeta);

// Row-wise softmax: dx = p * (dy - sum(dy * p)).
numcore::Tensor softmax_backward(const numcore::Tensor& probs, const numcore::Tensor& dy);

// Gradient holder with the shapes of `params`, all zero.
numcore::BlockParams zero_block_grads(const numcore::BlockParams& params);

// Backward pass of attention_block from its trace. Accumulates parameter
// gradients into `grads` and returns the gradient with respect to the input.
numcore::Tensor attention_block_backward(const numcore::BlockParams& params,
                                         const numcore::BlockTrace& trace,
                                         const numcore::Tensor& dy,
                                         numcore::BlockParams& grads,
                                         numcore::MeterContext& ctx);

}  // namespace tapverify::train
