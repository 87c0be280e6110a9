#include "tapverify/train/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/verify/checkpoint.hpp"
#include "tapverify/verify/features.hpp"

namespace tapverify::train {

using numcore::MeterContext;
using numcore::Tensor;

namespace {

constexpr std::uint64_t kSplitStream = 0x5b117;
constexpr std::uint64_t kShuffleStream = 0x5b0ff1e;

bool is_connector(const std::string& name) { return name.rfind("connector.", 0) == 0; }

std::size_t steps_per_epoch(std::size_t n, std::size_t batch) { return (n + batch - 1) / batch; }

std::vector<std::size_t> epoch_order(const std::vector<std::size_t>& train, std::uint64_t seed,
                                     std::size_t epoch) {
  std::vector<std::size_t> order = train;
  numcore::Rng rng(numcore::derive_seed({seed, kShuffleStream, epoch}));
  rng.shuffle(order.begin(), order.end());
  return order;
}

double mean_alignment_loss(const verify::VerifierModel& model, const std::vector<Tensor>& inputs,
                           const std::vector<scenes::LabeledSample>& samples,
                           const std::vector<std::size_t>& indices) {
  MeterContext ctx = MeterContext::disabled();
  double total = 0.0;
  for (std::size_t i : indices) {
    total += alignment_loss(model, inputs[i], samples[i].targets, nullptr, ctx);
  }
  return indices.empty() ? 0.0 : total / static_cast<double>(indices.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    throw InvalidArgument("warmup_fraction must lie in (0, 1)");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (!(lr_max >= 0.0)) throw InvalidArgument("lr_max must be non-negative");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"lr_max", c.lr_max},
                     {"warmup_fraction", c.warmup_fraction},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"train_fraction", c.train_fraction},
                     {"seed", c.seed},
                     {"adamw", c.adamw}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.lr_max = j.value("lr_max", d.lr_max);
  c.warmup_fraction = j.value("warmup_fraction", d.warmup_fraction);
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.train_fraction = j.value("train_fraction", d.train_fraction);
  c.seed = j.value("seed", d.seed);
  c.adamw = j.value("adamw", d.adamw);
  c.validate();
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write training curve: " + path.string());
  out << "step,lr,train_loss,eval_loss\n";
  // Shortest text that round-trips, so resumed curves compare exactly.
  auto num = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
  };
  for (const auto& p : curve) {
    out << p.step << ',' << num(p.lr) << ',' << num(p.train_loss) << ',';
    if (p.eval_loss) out << num(*p.eval_loss);
    out << '\n';
  }
}

std::vector<Tensor> prepare_all(const verify::VerifierModel& model,
                                const std::vector<scenes::LabeledSample>& samples) {
  MeterContext ctx = MeterContext::disabled();
  std::vector<Tensor> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(verify::prepare_inputs(model, s.features, ctx));
  return out;
}

void ensure_feature_stats(verify::VerifierModel& model,
                          const std::vector<scenes::LabeledSample>& samples) {
  if (model.mode() != VerifierMode::kHiddenState || model.stats) return;
  model.stats = scenes::calibrate_feature_stats(
      [&](std::size_t i) { return samples[i].features; }, samples.size());
}

std::uint64_t frozen_parameter_hash(const verify::VerifierModel& model) {
  std::string bytes;
  model.for_each_trainable([&](const std::string& name, const Tensor& t) {
    if (is_connector(name)) return;
    bytes += name;
    const auto d = t.data();
    bytes.append(reinterpret_cast<const char*>(d.data()), d.size() * sizeof(double));
  });
  return numcore::fnv1a64(bytes);
}

ClassificationMetrics evaluate(const verify::VerifierModel& model,
                               const std::vector<Tensor>& inputs,
                               const std::vector<scenes::LabeledSample>& samples,
                               const std::vector<std::size_t>& indices, const LossSpec& spec) {
  MeterContext ctx = MeterContext::disabled();
  ClassificationMetrics m;
  std::size_t correct = 0, yes_total = 0, yes_hit = 0, no_total = 0, no_hit = 0;
  for (std::size_t i : indices) {
    const auto& s = samples[i];
    const Tensor logits = verify::verifier_logits(model, inputs[i], s.prompt.tokens(), ctx);
    m.loss += loss_and_grad(spec, logits[0], logits[1], s.label).loss;
    const scenes::Label predicted =
        logits[0] >= logits[1] ? scenes::Label::kYes : scenes::Label::kNo;
    if (predicted == s.label) ++correct;
    if (s.label == scenes::Label::kYes) {
      ++yes_total;
      if (predicted == s.label) ++yes_hit;
    } else {
      ++no_total;
      if (predicted == s.label) ++no_hit;
    }
  }
  m.count = indices.size();
  if (m.count > 0) {
    m.loss /= static_cast<double>(m.count);
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.count);
  }
  m.recall_yes = yes_total ? static_cast<double>(yes_hit) / static_cast<double>(yes_total) : 0.0;
  m.recall_no = no_total ? static_cast<double>(no_hit) / static_cast<double>(no_total) : 0.0;
  return m;
}

AlignmentResult run_alignment(verify::VerifierModel& model,
                              const std::vector<scenes::LabeledSample>& samples,
                              const TrainConfig& config) {
  config.validate();
  if (samples.empty()) throw InvalidArgument("alignment set is empty");
  ensure_feature_stats(model, samples);
  const std::vector<Tensor> inputs = prepare_all(model, samples);
  const scenes::Split split = scenes::split_indices(
      samples.size(), config.train_fraction, numcore::derive_seed({config.seed, kSplitStream}));
  if (split.train.empty()) throw InvalidArgument("alignment training split is empty");

  AlignmentResult result;
  result.initial_eval_loss = mean_alignment_loss(model, inputs, samples, split.eval);

  const std::size_t per_epoch = steps_per_epoch(split.train.size(), config.batch_size);
  const std::size_t total = per_epoch * config.epochs;
  AdamW optimizer(config.adamw);
  train::ModelGrads grads = ModelGrads::zeros_like(model);
  MeterContext ctx = MeterContext::disabled();
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(split.train, config.seed, epoch);
    for (std::size_t b = 0; b < per_epoch; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      grads.set_zero();
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        batch_loss += alignment_loss(model, inputs[order[k]], samples[order[k]].targets, &grads,
                                     ctx);
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      grads.scale(inv);
      const double lr = lr_at(step + 1, total + 1, config.lr_max, config.warmup_fraction);
      optimizer.step(model, grads, lr, is_connector);
      result.curve.push_back({step, lr, batch_loss * inv, std::nullopt});
      ++step;
    }
    const double eval_loss = mean_alignment_loss(model, inputs, samples, split.eval);
    result.epoch_eval_loss.push_back(eval_loss);
    if (!result.curve.empty()) result.curve.back().eval_loss = eval_loss;
  }
  return result;
}

FinetuneResult run_finetune(const verify::VerifierModel& aligned,
                            const std::vector<scenes::LabeledSample>& samples,
                            const LossSpec& spec, const TrainConfig& config,
                            const std::optional<std::filesystem::path>& checkpoint_dir,
                            const std::optional<ResumePoint>& resume) {
  config.validate();
  spec.validate();
  FinetuneResult result;
  result.split = scenes::split_indices(samples.size(), config.train_fraction,
                                       numcore::derive_seed({config.seed, kSplitStream}));
  if (result.split.train.empty() || result.split.eval.empty()) {
    throw InvalidArgument("fine-tuning needs non-empty train and eval splits");
  }
  verify::VerifierModel model = resume ? resume->model : aligned;
  ensure_feature_stats(model, samples);
  const std::vector<Tensor> inputs = prepare_all(model, samples);

  const std::size_t per_epoch = steps_per_epoch(result.split.train.size(), config.batch_size);
  const std::size_t total = per_epoch * config.epochs;
  AdamW optimizer(config.adamw);
  std::size_t first_epoch = 0;
  result.best_eval_loss = std::numeric_limits<double>::infinity();
  result.best_model = model;
  if (resume) {
    optimizer.import_state(resume->optimizer_state);
    first_epoch = resume->epochs_done;
    result.best_eval_loss = resume->best_eval_loss;
    result.best_epoch = resume->best_epoch;
    if (resume->best_model) result.best_model = *resume->best_model;
  }
  if (checkpoint_dir) std::filesystem::create_directories(*checkpoint_dir);

  ModelGrads grads = ModelGrads::zeros_like(model);
  MeterContext ctx = MeterContext::disabled();
  std::size_t step = first_epoch * per_epoch;
  for (std::size_t epoch = first_epoch; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(result.split.train, config.seed, epoch);
    for (std::size_t b = 0; b < per_epoch; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      grads.set_zero();
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const auto& s = samples[order[k]];
        batch_loss += classification_loss(model, inputs[order[k]], s.prompt.tokens(), s.label,
                                          spec, &grads, ctx);
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      grads.scale(inv);
      const double lr = lr_at(step + 1, total + 1, config.lr_max, config.warmup_fraction);
      optimizer.step(model, grads, lr);
      result.curve.push_back({step, lr, batch_loss * inv, std::nullopt});
      ++step;
    }
    const ClassificationMetrics metrics =
        evaluate(model, inputs, samples, result.split.eval, spec);
    result.epoch_eval_loss.push_back(metrics.loss);
    result.epoch_metrics.push_back(metrics);
    result.curve.back().eval_loss = metrics.loss;
    if (metrics.loss < result.best_eval_loss) {
      result.best_eval_loss = metrics.loss;
      result.best_epoch = epoch + 1;
      result.best_model = model;
    }
    if (checkpoint_dir) {
      const nlohmann::json meta{{"stage", "finetune"},
                                {"epoch", epoch + 1},
                                {"eval_loss", metrics.loss},
                                {"eval_accuracy", metrics.accuracy},
                                {"best_epoch", result.best_epoch},
                                {"best_eval_loss", result.best_eval_loss}};
      verify::save_checkpoint(*checkpoint_dir / ("epoch_" + std::to_string(epoch + 1) + ".ckpt"),
                              model, meta, optimizer.export_state());
      if (result.best_epoch == epoch + 1) {
        verify::save_checkpoint(*checkpoint_dir / "best.ckpt", model, meta);
      }
    }
  }
  return result;
}

ResumePoint load_resume_point(const std::filesystem::path& epoch_checkpoint) {
  verify::Checkpoint ckpt = verify::load_checkpoint(epoch_checkpoint);
  if (ckpt.metadata.value("stage", std::string()) != "finetune") {
    throw StateError("not a fine-tuning epoch checkpoint: " + epoch_checkpoint.string());
  }
  ResumePoint r{std::move(ckpt.model), std::move(ckpt.extras),
                ckpt.metadata.at("epoch").get<std::size_t>(),
                ckpt.metadata.at("best_eval_loss").get<double>(),
                ckpt.metadata.at("best_epoch").get<std::size_t>(), std::nullopt};
  const auto best = epoch_checkpoint.parent_path() / "best.ckpt";
  if (std::filesystem::exists(best)) {
    verify::Checkpoint b = verify::load_checkpoint(best);
    if (b.metadata.value("epoch", std::size_t{0}) == r.best_epoch) r.best_model = std::move(b.model);
  }
  return r;
}

}  // namespace tapverify::train
