#include "tapverify/train/verifier_grad.hpp"

#include <algorithm>
#include <cmath>

#include "tapverify/error.hpp"
#include "tapverify/train/backprop.hpp"

namespace tapverify::train {

using numcore::MeterContext;
using numcore::Tensor;

namespace {

Tensor zeros_of(const Tensor& t) { return Tensor(t.shape()); }

std::vector<int> shape_candidates() {
  std::vector<int> ids{scenes::vocab::kEmpty};
  for (int s = 0; s < scenes::kNumShapes; ++s) ids.push_back(scenes::vocab::kShapeBase + s);
  return ids;
}

std::vector<int> color_candidates() {
  std::vector<int> ids{scenes::vocab::kEmpty};
  for (int c = 0; c < scenes::kNumColors; ++c) ids.push_back(scenes::vocab::kColorBase + c);
  return ids;
}

// Softmax cross-entropy of one projected row against a candidate set of
// embedding rows; adds d(row) into `d_row` scaled by `weight`.
double candidate_xe(std::span<const double> row, const Tensor& embed,
                    const std::vector<int>& candidates, int target, double weight,
                    std::span<double> d_row) {
  std::vector<double> logits(candidates.size());
  std::size_t target_index = candidates.size();
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto e = embed.row(static_cast<std::size_t>(candidates[j]));
    double dot = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) dot += row[c] * e[c];
    logits[j] = dot;
    if (candidates[j] == target) target_index = j;
  }
  if (target_index == candidates.size()) {
    throw InvalidArgument("alignment target " + std::to_string(target) + " not in candidate set");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double log_z = mx + std::log(z);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const double p = std::exp(logits[j] - log_z);
    const double g = weight * (p - (j == target_index ? 1.0 : 0.0));
    const auto e = embed.row(static_cast<std::size_t>(candidates[j]));
    for (std::size_t c = 0; c < row.size(); ++c) d_row[c] += g * e[c];
  }
  return weight * (log_z - logits[target_index]);
}

}  // namespace

ModelGrads ModelGrads::zeros_like(const verify::VerifierModel& model) {
  ModelGrads g;
  g.connector = {zeros_of(model.connector.w1), zeros_of(model.connector.b1),
                 zeros_of(model.connector.w2), zeros_of(model.connector.b2)};
  const auto& s = model.scorer;
  g.scorer.token_embed = zeros_of(s.token_embed);
  g.scorer.position = zeros_of(s.position);
  for (const auto& b : s.blocks) g.scorer.blocks.push_back(zero_block_grads(b));
  g.scorer.final_gamma = zeros_of(s.final_gamma);
  g.scorer.final_beta = zeros_of(s.final_beta);
  g.scorer.head_w = zeros_of(s.head_w);
  g.scorer.head_b = zeros_of(s.head_b);
  return g;
}

void ModelGrads::scale(double factor) {
  verify::visit_trainable(*this, [&](const std::string&, Tensor& t) {
    for (double& v : t.data()) v *= factor;
  });
}

void ModelGrads::set_zero() {
  verify::visit_trainable(*this, [](const std::string&, Tensor& t) {
    std::fill(t.data().begin(), t.data().end(), 0.0);
  });
}

Tensor verifier_backward(const verify::VerifierModel& model, const verify::ForwardTrace& trace,
                         const Tensor& d_logits, ModelGrads& grads, MeterContext& ctx) {
  const auto& s = model.scorer;
  const auto& st = trace.scorer;
  Tensor d_logits_row = d_logits.reshaped({1, 2});
  Tensor d_answer = linear_backward(st.answer, s.head_w, d_logits_row, grads.scorer.head_w,
                                    &grads.scorer.head_b, ctx);
  Tensor d_last = layer_norm_backward(st.final_ln, s.final_gamma, d_answer,
                                      grads.scorer.final_gamma, grads.scorer.final_beta);
  Tensor d_h(st.last_hidden.shape());
  const std::size_t last = d_h.rows() - 1;
  std::copy(d_last.data().begin(), d_last.data().end(), d_h.row(last).begin());
  for (std::size_t b = s.blocks.size(); b-- > 0;) {
    d_h = attention_block_backward(s.blocks[b], st.blocks[b], d_h, grads.scorer.blocks[b], ctx);
  }
  accumulate(grads.scorer.position, d_h);
  const std::size_t feature_rows = model.config().feature_tokens;
  for (std::size_t i = 0; i < st.tokens.size(); ++i) {
    auto dst = grads.scorer.token_embed.row(static_cast<std::size_t>(st.tokens[i]));
    const auto src = d_h.row(feature_rows + i);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
  Tensor d_projected = numcore::slice_rows(d_h, 0, feature_rows, ctx);

  const auto& ct = trace.connector;
  Tensor d_act = linear_backward(ct.activation, model.connector.w2, d_projected,
                                 grads.connector.w2, &grads.connector.b2, ctx);
  Tensor d_pre = gelu_backward(ct.pre_activation, d_act);
  return linear_backward(ct.input, model.connector.w1, d_pre, grads.connector.w1,
                         &grads.connector.b1, ctx);
}

double classification_loss(const verify::VerifierModel& model, const Tensor& inputs,
                           const std::vector<int>& prompt_tokens, scenes::Label label,
                           const LossSpec& spec, ModelGrads* grads, MeterContext& ctx) {
  verify::ForwardTrace trace;
  const Tensor logits =
      verify::verifier_logits(model, inputs, prompt_tokens, ctx, grads ? &trace : nullptr);
  const LossGrad lg = loss_and_grad(spec, logits[0], logits[1], label);
  if (grads != nullptr) {
    verifier_backward(model, trace, Tensor({2}, {lg.d_yes, lg.d_no}), *grads, ctx);
  }
  return lg.loss;
}

double alignment_loss(const verify::VerifierModel& model, const Tensor& inputs,
                      const scenes::AttributeTargets& targets, ModelGrads* grads,
                      MeterContext& ctx) {
  static const std::vector<int> shapes = shape_candidates();
  static const std::vector<int> colors = color_candidates();
  const std::size_t cells = inputs.rows();
  if (targets.shapes.size() != cells || targets.colors.size() != cells) {
    throw ShapeError("alignment targets do not match the number of feature rows");
  }
  verify::ConnectorTrace trace;
  const Tensor projected =
      verify::connector_forward(model.connector, inputs, ctx, grads ? &trace : nullptr);
  Tensor d_projected(projected.shape());
  const double weight = 1.0 / static_cast<double>(cells);
  double loss = 0.0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    loss += candidate_xe(projected.row(cell), model.scorer.token_embed, shapes,
                         targets.shapes[cell], weight, d_projected.row(cell));
    loss += candidate_xe(projected.row(cell), model.scorer.token_embed, colors,
                         targets.colors[cell], weight, d_projected.row(cell));
  }
  if (grads != nullptr) {
    Tensor d_act = linear_backward(trace.activation, model.connector.w2, d_projected,
                                   grads->connector.w2, &grads->connector.b2, ctx);
    Tensor d_pre = gelu_backward(trace.pre_activation, d_act);
    linear_backward(trace.input, model.connector.w1, d_pre, grads->connector.w1,
                    &grads->connector.b1, ctx);
  }
  return loss;
}

}  // namespace tapverify::train
