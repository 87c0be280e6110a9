#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>

namespace tapverify::numcore {

// FLOPs convention. A multiply-add counts as two FLOPs; the non-matmul
// kernels use the fixed per-element constants below.
//
//   kernel          formula
//   matmul          2 * m * k * n
//   add / scale     1 * elements
//   bias add        1 * rows * cols
//   clamp           1 * elements
//   softmax         kSoftmaxFlopsPerElement * rows * cols
//   layer norm      kLayerNormFlopsPerElement * rows * width
//   gelu            kGeluFlopsPerElement * elements
//   linear          matmul + bias add
//   attention block sum of its kernels, see flops_for(AttentionBlockOp)
inline constexpr std::uint64_t kSoftmaxFlopsPerElement = 5;    // max, sub, exp, sum, div
inline constexpr std::uint64_t kLayerNormFlopsPerElement = 8;  // mean, var, normalize, affine
inline constexpr std::uint64_t kGeluFlopsPerElement = 8;

struct MatmulOp { std::uint64_t m, k, n; };
struct ElementwiseOp { std::uint64_t elements; };  // add, scale, clamp
struct BiasAddOp { std::uint64_t rows, cols; };
struct LinearOp { std::uint64_t m, k, n; };
struct LayerNormOp { std::uint64_t rows, width; };
struct GeluOp { std::uint64_t elements; };
struct SoftmaxOp { std::uint64_t rows, cols; };
struct AttentionBlockOp { std::uint64_t tokens, width, mlp_width; };

using OpDescriptor = std::variant<MatmulOp, ElementwiseOp, BiasAddOp, LinearOp,
                                  LayerNormOp, GeluOp, SoftmaxOp, AttentionBlockOp>;

std::uint64_t flops_for(const OpDescriptor& op);

// Builds a descriptor from a kernel name and its dimensions, e.g.
// ("matmul", {8, 4, 8}). Throws InvalidArgument for unknown kernels or a
// wrong number of dimensions.
OpDescriptor make_descriptor(std::string_view kernel,
                             std::span<const std::uint64_t> dims);

}  // namespace tapverify::numcore
