#include "tapverify/numcore/flops.hpp"

#include <string>

#include "tapverify/error.hpp"

namespace tapverify::numcore {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint64_t matmul_flops(std::uint64_t m, std::uint64_t k, std::uint64_t n) {
  return 2 * m * k * n;
}

}  // namespace

std::uint64_t flops_for(const OpDescriptor& op) {
  return std::visit(
      Overloaded{
          [](const MatmulOp& o) { return matmul_flops(o.m, o.k, o.n); },
          [](const ElementwiseOp& o) { return o.elements; },
          [](const BiasAddOp& o) { return o.rows * o.cols; },
          [](const LinearOp& o) { return matmul_flops(o.m, o.k, o.n) + o.m * o.n; },
          [](const LayerNormOp& o) { return kLayerNormFlopsPerElement * o.rows * o.width; },
          [](const GeluOp& o) { return kGeluFlopsPerElement * o.elements; },
          [](const SoftmaxOp& o) { return kSoftmaxFlopsPerElement * o.rows * o.cols; },
          [](const AttentionBlockOp& o) {
            const std::uint64_t t = o.tokens, d = o.width, m = o.mlp_width;
            std::uint64_t total = 0;
            total += flops_for(LayerNormOp{t, d});
            total += 3 * matmul_flops(t, d, d);     // q, k, v
            total += matmul_flops(t, d, t);         // scores
            total += t * t;                         // 1/sqrt(d) scaling
            total += flops_for(SoftmaxOp{t, t});
            total += matmul_flops(t, t, d);         // probs * v
            total += matmul_flops(t, d, d) + t * d; // output projection + residual
            total += flops_for(LayerNormOp{t, d});
            total += flops_for(LinearOp{t, d, m});
            total += flops_for(GeluOp{t * m});
            total += flops_for(LinearOp{t, m, d}) + t * d;
            return total;
          },
      },
      op);
}

OpDescriptor make_descriptor(std::string_view kernel,
                             std::span<const std::uint64_t> dims) {
  auto need = [&](std::size_t n) {
    if (dims.size() != n) {
      throw InvalidArgument("kernel '" + std::string(kernel) + "' takes " +
                            std::to_string(n) + " dimensions, got " +
                            std::to_string(dims.size()));
    }
  };
  if (kernel == "matmul") {
    need(3);
    return MatmulOp{dims[0], dims[1], dims[2]};
  }
  if (kernel == "add" || kernel == "scale" || kernel == "clamp") {
    need(1);
    return ElementwiseOp{dims[0]};
  }
  if (kernel == "bias_add") {
    need(2);
    return BiasAddOp{dims[0], dims[1]};
  }
  if (kernel == "linear") {
    need(3);
    return LinearOp{dims[0], dims[1], dims[2]};
  }
  if (kernel == "layer_norm") {
    need(2);
    return LayerNormOp{dims[0], dims[1]};
  }
  if (kernel == "gelu") {
    need(1);
    return GeluOp{dims[0]};
  }
  if (kernel == "softmax") {
    need(2);
    return SoftmaxOp{dims[0], dims[1]};
  }
  if (kernel == "attention_block") {
    need(3);
    return AttentionBlockOp{dims[0], dims[1], dims[2]};
  }
  throw InvalidArgument("unknown kernel '" + std::string(kernel) + "'");
}

}  // namespace tapverify::numcore
