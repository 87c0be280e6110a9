#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "tapverify/train/verifier_grad.hpp"
#include "tapverify/verify/model.hpp"

namespace tapverify::train {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;  // decoupled, applied to matrices only
};

void to_json(nlohmann::json& j, const AdamWConfig& c);
void from_json(const nlohmann::json& j, AdamWConfig& c);

// Adaptive moments with decoupled weight decay over the trainable tensors
// of a VerifierModel.
class AdamW {
 public:
  explicit AdamW(AdamWConfig config = {}) : config_(config) {}

  // Updates every trainable tensor whose name passes `filter` (all when
  // empty).
  void step(verify::VerifierModel& model, const ModelGrads& grads, double lr,
            const std::function<bool(const std::string&)>& filter = {});

  std::size_t steps() const { return steps_; }

  // Moments as named tensors ("m.<name>", "v.<name>") plus the step count,
  // for checkpointing.
  std::map<std::string, numcore::Tensor> export_state() const;
  void import_state(const std::map<std::string, numcore::Tensor>& state);

 private:
  AdamWConfig config_;
  std::size_t steps_ = 0;
  std::map<std::string, numcore::Tensor> m_, v_;
};

// Linear warm-up from 0 to lr_max over ceil(warmup_fraction * total) steps,
// then cosine decay to 0 at `total`. Throws InvalidArgument when step is
// outside [0, total] or the fraction is outside (0, 1).
double lr_at(std::size_t step, std::size_t total, double lr_max, double warmup_fraction);

}  // namespace tapverify::train
