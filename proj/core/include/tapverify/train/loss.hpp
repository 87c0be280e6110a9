#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

#include "tapverify/scenes/class_weights.hpp"
#include "tapverify/scenes/oracle.hpp"

namespace tapverify::train {

inline constexpr double kLogClamp = 1e-12;

enum class LossKind { kXe, kWeightedXe, kFocal };

std::string_view loss_kind_name(LossKind kind);

// Loss over the [Yes, No] logit pair.
//   xe           -log p_t
//   weighted_xe  -w_t log p_t, weights summing to one
//   focal        -alpha_t (1 - p_t)^gamma log p_t, alpha_t taken from `weights`
struct LossSpec {
  LossKind kind = LossKind::kWeightedXe;
  scenes::ClassWeights weights{1.0, 1.0};
  double gamma = 2.0;

  static LossSpec xe() { return {LossKind::kXe, {1.0, 1.0}, 0.0}; }
  static LossSpec weighted_xe(scenes::ClassWeights w) { return {LossKind::kWeightedXe, w, 0.0}; }
  static LossSpec focal(scenes::ClassWeights alpha, double gamma) {
    return {LossKind::kFocal, alpha, gamma};
  }

  double weight_for(scenes::Label label) const;
  // Throws InvalidArgument on weights not summing to one (weighted_xe),
  // negative gamma or negative weights.
  void validate() const;
};

void to_json(nlohmann::json& j, const LossSpec& spec);
void from_json(const nlohmann::json& j, LossSpec& spec);

struct LossGrad {
  double loss = 0.0;
  double d_yes = 0.0;
  double d_no = 0.0;
};

LossGrad loss_and_grad(const LossSpec& spec, double yes_logit, double no_logit,
                       scenes::Label label);

}  // namespace tapverify::train
