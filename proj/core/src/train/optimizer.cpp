#include "tapverify/train/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "tapverify/error.hpp"

namespace tapverify::train {

using numcore::Tensor;

void to_json(nlohmann::json& j, const AdamWConfig& c) {
  j = nlohmann::json{{"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"epsilon", c.epsilon},
                     {"weight_decay", c.weight_decay}};
}

void from_json(const nlohmann::json& j, AdamWConfig& c) {
  AdamWConfig d;
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.epsilon = j.value("epsilon", d.epsilon);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
}

void AdamW::step(verify::VerifierModel& model, const ModelGrads& grads, double lr,
                 const std::function<bool(const std::string&)>& filter) {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);

  std::map<std::string, const Tensor*> grad_by_name;
  verify::visit_trainable(grads, [&](const std::string& name, const Tensor& g) {
    grad_by_name[name] = &g;
  });
  model.for_each_trainable([&](const std::string& name, Tensor& p) {
    if (filter && !filter(name)) return;
    const Tensor& g = *grad_by_name.at(name);
    auto [mit, m_new] = m_.try_emplace(name, Tensor(p.shape()));
    auto [vit, v_new] = v_.try_emplace(name, Tensor(p.shape()));
    auto m = mit->second.data();
    auto v = vit->second.data();
    auto w = p.data();
    const auto gd = g.data();
    const double decay = p.rank() == 2 ? config_.weight_decay : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gd[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gd[i] * gd[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      w[i] -= lr * (m_hat / (std::sqrt(v_hat) + config_.epsilon) + decay * w[i]);
    }
  });
}

std::map<std::string, Tensor> AdamW::export_state() const {
  std::map<std::string, Tensor> out;
  for (const auto& [name, t] : m_) out.emplace("m." + name, t);
  for (const auto& [name, t] : v_) out.emplace("v." + name, t);
  out.emplace("steps", Tensor({1}, {static_cast<double>(steps_)}));
  return out;
}

void AdamW::import_state(const std::map<std::string, Tensor>& state) {
  m_.clear();
  v_.clear();
  steps_ = 0;
  for (const auto& [name, t] : state) {
    if (name.rfind("m.", 0) == 0) {
      m_.emplace(name.substr(2), t);
    } else if (name.rfind("v.", 0) == 0) {
      v_.emplace(name.substr(2), t);
    } else if (name == "steps") {
      steps_ = static_cast<std::size_t>(t[0]);
    }
  }
}

double lr_at(std::size_t step, std::size_t total, double lr_max, double warmup_fraction) {
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    throw InvalidArgument("warmup_fraction must lie in (0, 1)");
  }
  if (step > total) {
    throw InvalidArgument("step " + std::to_string(step) + " beyond total " +
                          std::to_string(total));
  }
  if (total == 0) return 0.0;
  const auto warmup = static_cast<std::size_t>(
      std::ceil(warmup_fraction * static_cast<double>(total)));
  if (step < warmup) return lr_max * static_cast<double>(step) / static_cast<double>(warmup);
  if (warmup >= total) return step == total ? 0.0 : lr_max;
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
  return lr_max * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace tapverify::train
