#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tapverify/modes.hpp"
#include "tapverify/numcore/tensor.hpp"
#include "tapverify/scenes/oracle.hpp"
#include "tapverify/scenes/prompt.hpp"
#include "tapverify/toygen/generator.hpp"

namespace tapverify::scenes {

// Per-cell attribute tokens of a scene, row-major cells: the shape (or
// EMPTY) and the colour (or EMPTY) of whatever occupies the cell.
struct AttributeTargets {
  std::vector<int> shapes;
  std::vector<int> colors;
};

AttributeTargets attribute_targets(const Scene& scene);

struct LabeledSample {
  std::string id;
  Prompt prompt;
  std::uint64_t seed = 0;
  Label label = Label::kNo;
  numcore::Tensor features;  // raw features for the dataset's verifier mode
  AttributeTargets targets;  // of the rendered (possibly corrupted) scene

  Category category() const { return prompt.spec.category; }
};

struct SynthesisConfig {
  std::size_t prompt_count = 500;
  std::size_t candidates_per_prompt = 8;
  std::uint64_t seed = 1;
};

// Runs the generator candidates_per_prompt times per prompt with distinct
// seeds, taps features for `mode` and labels each candidate with the
// oracle. Corruption rate comes from the generator config.
std::vector<LabeledSample> synthesize_finetune_set(const toygen::Generator& generator,
                                                   VerifierMode mode,
                                                   const SynthesisConfig& config);

// Same candidates, one per prompt; only the features and attribute targets
// are used by the alignment stage.
std::vector<LabeledSample> synthesize_alignment_set(const toygen::Generator& generator,
                                                    VerifierMode mode, std::size_t count,
                                                    std::uint64_t seed);

void to_json(nlohmann::json& j, const Scene& scene);
void from_json(const nlohmann::json& j, Scene& scene);
void to_json(nlohmann::json& j, const Prompt& prompt);
void from_json(const nlohmann::json& j, Prompt& prompt);

// Writes `<stem>.jsonl` (one record per sample: id, prompt, category, seed,
// label, feature_ref, targets) and `<stem>.bin` (per record an 8-byte
// header of two little-endian u32 dimensions, then row-major f32 data).
void write_dataset(const std::filesystem::path& stem, const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> read_dataset(const std::filesystem::path& stem);

// Deterministic 80/20 style split by shuffled index.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};
Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

}  // namespace tapverify::scenes
