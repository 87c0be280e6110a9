#pragma once

#include <vector>

#include "tapverify/numcore/meter_context.hpp"
#include "tapverify/numcore/tensor.hpp"

namespace tapverify::numcore {

inline constexpr double kLayerNormEpsilon = 1e-5;

// Intermediates kept by layer_norm for the hand-written backward pass.
struct LayerNormTrace {
  Tensor normalized;            // (x - mean) * inv_std, before the affine map
  std::vector<double> inv_std;  // one per row
};

// Every kernel below is pure given its inputs, adds its FLOPs to `ctx`,
// registers its output with `ctx`'s allocation ledger, and throws
// NumericError if any output is NaN or Inf.

// [m x k] * [k x n]
Tensor matmul(const Tensor& a, const Tensor& b, MeterContext& ctx);
// a^T * b with a: [k x m], b: [k x n]
Tensor matmul_tn(const Tensor& a, const Tensor& b, MeterContext& ctx);
// a * b^T with a: [m x k], b: [n x k]
Tensor matmul_nt(const Tensor& a, const Tensor& b, MeterContext& ctx);

Tensor add(const Tensor& a, const Tensor& b, MeterContext& ctx);
Tensor scale(const Tensor& a, double factor, MeterContext& ctx);
// Adds a length-n vector to every row of an [m x n] matrix.
Tensor add_bias(const Tensor& a, const Tensor& bias, MeterContext& ctx);
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias,
              MeterContext& ctx);

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  MeterContext& ctx, LayerNormTrace* trace = nullptr);
// Exact (erf) GELU.
Tensor gelu(const Tensor& x, MeterContext& ctx);
double gelu_scalar(double x);
double gelu_derivative(double x);
// Row-wise, max-shifted.
Tensor softmax_rows(const Tensor& x, MeterContext& ctx);
Tensor clamp(const Tensor& x, double lo, double hi, MeterContext& ctx);

// Data movement; zero FLOPs.
Tensor concat_rows(const std::vector<const Tensor*>& parts, MeterContext& ctx);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count,
                  MeterContext& ctx);
Tensor transpose(const Tensor& x, MeterContext& ctx);

namespace detail {
// Rounds to the context precision, checks finiteness and tracks the output.
void finish(Tensor& out, MeterContext& ctx, const char* kernel);
}  // namespace detail

}  // namespace tapverify::numcore
