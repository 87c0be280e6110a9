#include "tapverify/numcore/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tapverify/error.hpp"
#include "tapverify/numcore/flops.hpp"

namespace tapverify::numcore {

namespace detail {

void finish(Tensor& out, MeterContext& ctx, const char* kernel) {
  const bool round32 = ctx.precision() == Precision::kFloat32;
  for (double& v : out.data()) {
    if (round32) v = static_cast<double>(static_cast<float>(v));
    if (!std::isfinite(v)) {
      throw NumericError(std::string(kernel) + ": non-finite output");
    }
  }
  ctx.track(out);
}

}  // namespace detail

namespace {

void require_matrix(const Tensor& t, const char* kernel, const char* name) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(kernel) + ": " + name + " must be rank 2, got " +
                     shape_to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* kernel) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(kernel) + ": shape mismatch " +
                     shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
}

std::size_t vector_length(const Tensor& v, const char* kernel) {
  if (v.rank() == 1) return v.dim(0);
  if (v.rank() == 2 && v.dim(0) == 1) return v.dim(1);
  throw ShapeError(std::string(kernel) + ": expected a vector, got " +
                   shape_to_string(v.shape()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b, MeterContext& ctx) {
  require_matrix(a, "matmul", "a");
  require_matrix(b, "matmul", "b");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ " + shape_to_string(a.shape()) +
                     " x " + shape_to_string(b.shape()));
  }
  Tensor out({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = po + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  ctx.add_flops(2ULL * m * k * n);
  detail::finish(out, ctx, "matmul");
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b, MeterContext& ctx) {
  require_matrix(a, "matmul_tn", "a");
  require_matrix(b, "matmul_tn", "b");
  const std::size_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul_tn: leading dimensions differ " +
                     shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
  Tensor out({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = pa + p * m;
    const double* brow = pb + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* orow = po + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  ctx.add_flops(2ULL * m * k * n);
  detail::finish(out, ctx, "matmul_tn");
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b, MeterContext& ctx) {
  require_matrix(a, "matmul_nt", "a");
  require_matrix(b, "matmul_nt", "b");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) {
    throw ShapeError("matmul_nt: trailing dimensions differ " +
                     shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
  Tensor out({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = pb + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      po[i * n + j] = s;
    }
  }
  ctx.add_flops(2ULL * m * k * n);
  detail::finish(out, ctx, "matmul_nt");
  return out;
}

Tensor add(const Tensor& a, const Tensor& b, MeterContext& ctx) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  ctx.add_flops(a.size());
  detail::finish(out, ctx, "add");
  return out;
}

Tensor scale(const Tensor& a, double factor, MeterContext& ctx) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
  ctx.add_flops(a.size());
  detail::finish(out, ctx, "scale");
  return out;
}

Tensor add_bias(const Tensor& a, const Tensor& bias, MeterContext& ctx) {
  require_matrix(a, "add_bias", "a");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (vector_length(bias, "add_bias") != n) {
    throw ShapeError("add_bias: bias length " + std::to_string(bias.size()) +
                     " does not match width " + std::to_string(n));
  }
  Tensor out(a.shape());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = a(i, j) + bias[j];
  }
  ctx.add_flops(static_cast<std::uint64_t>(m) * n);
  detail::finish(out, ctx, "add_bias");
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias,
              MeterContext& ctx) {
  return add_bias(matmul(x, weight, ctx), bias, ctx);
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  MeterContext& ctx, LayerNormTrace* trace) {
  require_matrix(x, "layer_norm", "x");
  const std::size_t rows = x.dim(0), width = x.dim(1);
  if (vector_length(gamma, "layer_norm") != width ||
      vector_length(beta, "layer_norm") != width) {
    throw ShapeError("layer_norm: affine parameters do not match width " +
                     std::to_string(width));
  }
  Tensor out(x.shape());
  Tensor normalized(x.shape());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto in = x.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(width);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(width);
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    inv_std[r] = rstd;
    for (std::size_t c = 0; c < width; ++c) {
      const double xhat = (in[c] - mean) * rstd;
      normalized(r, c) = xhat;
      out(r, c) = gamma[c] * xhat + beta[c];
    }
  }
  ctx.add_flops(kLayerNormFlopsPerElement * rows * width);
  detail::finish(out, ctx, "layer_norm");
  if (trace) {
    trace->normalized = std::move(normalized);
    trace->inv_std = std::move(inv_std);
  }
  return out;
}

double gelu_scalar(double x) {
  return 0.5 * x * (1.0 + std::erf(x * (1.0 / std::numbers::sqrt2)));
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * (1.0 / std::numbers::sqrt2)));
  const double pdf = std::exp(-0.5 * x * x) * 0.5 * std::numbers::inv_sqrtpi *
                     std::numbers::sqrt2;
  return cdf + x * pdf;
}

Tensor gelu(const Tensor& x, MeterContext& ctx) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = gelu_scalar(x[i]);
  ctx.add_flops(kGeluFlopsPerElement * x.size());
  detail::finish(out, ctx, "gelu");
  return out;
}

Tensor softmax_rows(const Tensor& x, MeterContext& ctx) {
  require_matrix(x, "softmax_rows", "x");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto in = x.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - mx);
      sum += o[c];
    }
    for (double& v : o) v /= sum;
  }
  ctx.add_flops(kSoftmaxFlopsPerElement * rows * cols);
  detail::finish(out, ctx, "softmax_rows");
  return out;
}

Tensor clamp(const Tensor& x, double lo, double hi, MeterContext& ctx) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], lo, hi);
  ctx.add_flops(x.size());
  detail::finish(out, ctx, "clamp");
  return out;
}

Tensor concat_rows(const std::vector<const Tensor*>& parts, MeterContext& ctx) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t width = parts.front()->cols();
  std::size_t rows = 0;
  for (const Tensor* p : parts) {
    if (p->cols() != width) {
      throw ShapeError("concat_rows: width mismatch " + shape_to_string(p->shape()));
    }
    rows += p->rows();
  }
  std::vector<double> data;
  data.reserve(rows * width);
  for (const Tensor* p : parts) data.insert(data.end(), p->data().begin(), p->data().end());
  Tensor out({rows, width}, std::move(data));
  detail::finish(out, ctx, "concat_rows");
  return out;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count,
                  MeterContext& ctx) {
  require_matrix(x, "slice_rows", "x");
  if (begin + count > x.dim(0)) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of range for " +
                     shape_to_string(x.shape()));
  }
  const std::size_t width = x.dim(1);
  std::vector<double> data(x.data().begin() + static_cast<std::ptrdiff_t>(begin * width),
                           x.data().begin() +
                               static_cast<std::ptrdiff_t>((begin + count) * width));
  Tensor out({count, width}, std::move(data));
  detail::finish(out, ctx, "slice_rows");
  return out;
}

Tensor transpose(const Tensor& x, MeterContext& ctx) {
  require_matrix(x, "transpose", "x");
  const std::size_t m = x.dim(0), n = x.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(j, i) = x(i, j);
  }
  detail::finish(out, ctx, "transpose");
  return out;
}

}  // namespace tapverify::numcore
