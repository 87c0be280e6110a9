#pragma once

#include <vector>

#include "tapverify/scenes/dataset.hpp"
#include "tapverify/train/loss.hpp"
#include "tapverify/verify/model.hpp"

namespace tapverify::train {

// Gradients laid out like the trainable part of a VerifierModel, so
// verify::visit_trainable walks both with matching names.
struct ModelGrads {
  verify::Connector connector;
  verify::Scorer scorer;

  static ModelGrads zeros_like(const verify::VerifierModel& model);
  void scale(double factor);
  void set_zero();
};

// Backward from d(logits) through scorer and connector. Accumulates into
// `grads` and returns the gradient with respect to the connector inputs.
numcore::Tensor verifier_backward(const verify::VerifierModel& model,
                                  const verify::ForwardTrace& trace,
                                  const numcore::Tensor& d_logits, ModelGrads& grads,
                                  numcore::MeterContext& ctx);

// Classification loss of one sample; adds its gradient to `grads` when
// given.
double classification_loss(const verify::VerifierModel& model, const numcore::Tensor& inputs,
                           const std::vector<int>& prompt_tokens, scenes::Label label,
                           const LossSpec& spec, ModelGrads* grads,
                           numcore::MeterContext& ctx);

// Alignment loss: per cell, cross-entropy of the connector output against
// the frozen scorer token embeddings of {EMPTY, shapes} and of
// {EMPTY, colours}, averaged over cells. Only connector gradients are
// produced.
double alignment_loss(const verify::VerifierModel& model, const numcore::Tensor& inputs,
                      const scenes::AttributeTargets& targets, ModelGrads* grads,
                      numcore::MeterContext& ctx);

}  // namespace tapverify::train
