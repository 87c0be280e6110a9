#include "tapverify/train/loss.hpp"

#include <cmath>
#include <string>

#include "tapverify/error.hpp"

namespace tapverify::train {

namespace {

// log(sigmoid(m)) without overflow.
double log_sigmoid(double m) {
  return m >= 0.0 ? -std::log1p(std::exp(-m)) : m - std::log1p(std::exp(m));
}

double sigmoid(double m) {
  return m >= 0.0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
}

}  // namespace

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kXe: return "xe";
    case LossKind::kWeightedXe: return "weighted_xe";
    case LossKind::kFocal: return "focal";
  }
  return "?";
}

double LossSpec::weight_for(scenes::Label label) const {
  if (kind == LossKind::kXe) return 1.0;
  return label == scenes::Label::kYes ? weights.positive : weights.negative;
}

void LossSpec::validate() const {
  if (weights.positive < 0.0 || weights.negative < 0.0) {
    throw InvalidArgument("class weights must be non-negative");
  }
  if (kind == LossKind::kWeightedXe &&
      std::abs(weights.positive + weights.negative - 1.0) > 1e-9) {
    throw InvalidArgument("weighted_xe weights must sum to 1");
  }
  if (kind == LossKind::kFocal && !(gamma >= 0.0)) {
    throw InvalidArgument("focal gamma must be non-negative");
  }
}

void to_json(nlohmann::json& j, const LossSpec& spec) {
  j = nlohmann::json{{"kind", std::string(loss_kind_name(spec.kind))},
                     {"w_pos", spec.weights.positive},
                     {"w_neg", spec.weights.negative},
                     {"gamma", spec.gamma}};
}

void from_json(const nlohmann::json& j, LossSpec& spec) {
  const std::string kind = j.value("kind", std::string("weighted_xe"));
  if (kind == "xe") {
    spec.kind = LossKind::kXe;
  } else if (kind == "weighted_xe") {
    spec.kind = LossKind::kWeightedXe;
  } else if (kind == "focal") {
    spec.kind = LossKind::kFocal;
  } else {
    throw InvalidArgument("unknown loss kind '" + kind + "'");
  }
  spec.weights.positive = j.value("w_pos", 1.0);
  spec.weights.negative = j.value("w_neg", 1.0);
  spec.gamma = j.value("gamma", spec.kind == LossKind::kFocal ? 2.0 : 0.0);
  spec.validate();
}

LossGrad loss_and_grad(const LossSpec& spec, double yes_logit, double no_logit,
                       scenes::Label label) {
  const bool yes = label == scenes::Label::kYes;
  // Margin of the target logit over the other one.
  const double m = yes ? yes_logit - no_logit : no_logit - yes_logit;
  const double p = sigmoid(m);    // p_t
  const double q = sigmoid(-m);   // 1 - p_t
  const double log_clamp = std::log(kLogClamp);
  const double raw_log_p = log_sigmoid(m);
  const bool clamped = raw_log_p < log_clamp;
  const double log_p = clamped ? log_clamp : raw_log_p;
  const double w = spec.weight_for(label);

  double loss = 0.0;
  double d_m = 0.0;
  if (spec.kind == LossKind::kFocal) {
    const double mod = spec.gamma == 0.0 ? 1.0 : std::pow(q, spec.gamma);
    loss = -w * mod * log_p;
    // d/dm of -(1-p)^g log p with dp/dm = p q.
    d_m = w * mod * (spec.gamma * p * log_p - (clamped ? 0.0 : q));
  } else {
    loss = -w * log_p;
    d_m = clamped ? 0.0 : -w * q;
  }
  return yes ? LossGrad{loss, d_m, -d_m} : LossGrad{loss, -d_m, d_m};
}

}  // namespace tapverify::train
