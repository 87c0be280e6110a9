#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tapverify/scenes/dataset.hpp"
#include "tapverify/train/loss.hpp"
#include "tapverify/train/optimizer.hpp"
#include "tapverify/verify/model.hpp"

namespace tapverify::train {

enum class Stage { kAlignment, kFinetune };

struct TrainConfig {
  double lr_max = 1e-3;
  double warmup_fraction = 0.03;
  std::size_t epochs = 5;
  std::size_t batch_size = 16;
  double train_fraction = 0.8;
  std::uint64_t seed = 3;
  AdamWConfig adamw;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct CurvePoint {
  std::size_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> eval_loss;  // present at epoch ends
};

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve);

struct ClassificationMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
  double recall_yes = 0.0;
  double recall_no = 0.0;
  std::size_t count = 0;
};

// Connector inputs for each sample (normalization / frozen encoder applied).
std::vector<numcore::Tensor> prepare_all(const verify::VerifierModel& model,
                                         const std::vector<scenes::LabeledSample>& samples);

// Fits hidden-state normalization statistics on `samples` when the model
// has none. No-op in other modes.
void ensure_feature_stats(verify::VerifierModel& model,
                          const std::vector<scenes::LabeledSample>& samples);

// Hash of every trainable tensor outside the connector.
std::uint64_t frozen_parameter_hash(const verify::VerifierModel& model);

ClassificationMetrics evaluate(const verify::VerifierModel& model,
                               const std::vector<numcore::Tensor>& inputs,
                               const std::vector<scenes::LabeledSample>& samples,
                               const std::vector<std::size_t>& indices, const LossSpec& spec);

struct AlignmentResult {
  double initial_eval_loss = 0.0;
  std::vector<double> epoch_eval_loss;
  std::vector<CurvePoint> curve;
};

// Stage one: trains the connector alone so projected features predict the
// per-cell attribute tokens; the scorer stays bitwise unchanged.
// Throws InvalidArgument on an empty set.
AlignmentResult run_alignment(verify::VerifierModel& model,
                              const std::vector<scenes::LabeledSample>& samples,
                              const TrainConfig& config);

// Where a previous fine-tuning run stopped.
struct ResumePoint {
  verify::VerifierModel model;
  std::map<std::string, numcore::Tensor> optimizer_state;
  std::size_t epochs_done = 0;
  double best_eval_loss = 0.0;
  std::size_t best_epoch = 0;
  std::optional<verify::VerifierModel> best_model;
};

struct FinetuneResult {
  verify::VerifierModel best_model;
  std::size_t best_epoch = 0;  // 1-based
  double best_eval_loss = 0.0;
  std::vector<double> epoch_eval_loss;
  std::vector<ClassificationMetrics> epoch_metrics;
  std::vector<CurvePoint> curve;
  scenes::Split split;
};

// Stage two: trains connector and scorer on an 80/20 split, evaluates after
// every epoch and returns the epoch with the lowest held-out loss. With
// `checkpoint_dir`, writes epoch_<k>.ckpt (model, optimizer state, epoch
// bookkeeping) and best.ckpt. Throws InvalidArgument on an empty split.
FinetuneResult run_finetune(const verify::VerifierModel& aligned,
                            const std::vector<scenes::LabeledSample>& samples,
                            const LossSpec& spec, const TrainConfig& config,
                            const std::optional<std::filesystem::path>& checkpoint_dir = {},
                            const std::optional<ResumePoint>& resume = {});

// Reads an epoch checkpoint written by run_finetune.
ResumePoint load_resume_point(const std::filesystem::path& epoch_checkpoint);

}  // namespace tapverify::train
