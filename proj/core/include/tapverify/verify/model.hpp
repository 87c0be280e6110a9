#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tapverify/modes.hpp"
#include "tapverify/numcore/attention.hpp"
#include "tapverify/numcore/kernels.hpp"
#include "tapverify/scenes/feature_stats.hpp"
#include "tapverify/toygen/config.hpp"

namespace tapverify::verify {

struct VerifierConfig {
  VerifierMode mode = VerifierMode::kHiddenState;
  std::size_t tap_layer = 3;          // hidden_state only
  std::size_t feature_tokens = 16;    // image positions seen by the connector
  std::size_t in_dim = 64;            // connector input width
  std::size_t connector_hidden = 64;
  std::size_t scorer_width = 64;
  std::size_t scorer_blocks = 2;
  std::size_t scorer_mlp = 128;
  std::size_t patch_channels = 48;    // pixel_reencode: raw patch width
  std::size_t encoder_blocks = 2;     // pixel_reencode: stand-in encoder depth
  std::size_t encoder_width = 64;
  std::size_t encoder_mlp = 128;
  std::uint64_t init_seed = 11;

  // Scorer sequence: features, prompt tokens, one answer slot.
  std::size_t sequence_length() const;
  void validate() const;

  // Widths consistent with a generator for the given mode.
  static VerifierConfig for_generator(VerifierMode mode, const toygen::GeneratorConfig& gen);

  friend bool operator==(const VerifierConfig&, const VerifierConfig&) = default;
};

void to_json(nlohmann::json& j, const VerifierConfig& c);
void from_json(const nlohmann::json& j, VerifierConfig& c);

// Two linear maps with a GELU between.
struct Connector {
  numcore::Tensor w1, b1;  // [in x hidden], [hidden]
  numcore::Tensor w2, b2;  // [hidden x out], [out]
};

struct ConnectorTrace {
  numcore::Tensor input, pre_activation, activation;
};

numcore::Tensor connector_forward(const Connector& c, const numcore::Tensor& x,
                                  numcore::MeterContext& ctx,
                                  ConnectorTrace* trace = nullptr);

// Small transformer over [projected features ; prompt tokens ; answer slot]
// ending in a two-logit {Yes, No} head read from the answer slot.
struct Scorer {
  numcore::Tensor token_embed;  // [vocab x s]
  numcore::Tensor position;     // [sequence x s]
  std::vector<numcore::BlockParams> blocks;
  numcore::Tensor final_gamma, final_beta;  // [s]
  numcore::Tensor head_w, head_b;           // [s x 2], [2]
};

struct ScorerTrace {
  std::vector<int> tokens;
  numcore::Tensor sequence;  // input to the first block
  std::vector<numcore::BlockTrace> blocks;
  numcore::Tensor last_hidden;   // output of the last block
  numcore::LayerNormTrace final_ln;
  numcore::Tensor answer;        // normalized answer row, [1 x s]
};

// Frozen random encoder standing in for the visual encoder of a pixel
// verifier: patch embedding plus attention blocks.
struct PixelEncoder {
  numcore::Tensor patch_embed;  // [patch_channels x w]
  numcore::Tensor position;     // [feature_tokens x w]
  std::vector<numcore::BlockParams> blocks;
};

numcore::Tensor encode_patches(const PixelEncoder& encoder, const numcore::Tensor& patches,
                               numcore::MeterContext& ctx);

class VerifierModel {
 public:
  VerifierModel() = default;
  explicit VerifierModel(VerifierConfig config);

  const VerifierConfig& config() const { return config_; }
  VerifierMode mode() const { return config_.mode; }

  Connector connector;
  Scorer scorer;
  std::optional<PixelEncoder> encoder;
  std::optional<scenes::FeatureStats> stats;  // hidden_state normalization

  // Trainable tensors (connector, then scorer) with stable names.
  template <typename F>
  void for_each_trainable(F&& f);
  template <typename F>
  void for_each_trainable(F&& f) const;
  // Frozen encoder tensors; empty outside pixel_reencode.
  template <typename F>
  void for_each_frozen(F&& f) const;

  std::size_t parameter_count() const;

 private:
  VerifierConfig config_;
};

struct ForwardTrace {
  ConnectorTrace connector;
  ScorerTrace scorer;
};

// Logits [Yes, No] for already-prepared connector inputs.
numcore::Tensor verifier_logits(const VerifierModel& model, const numcore::Tensor& inputs,
                                const std::vector<int>& prompt_tokens,
                                numcore::MeterContext& ctx, ForwardTrace* trace = nullptr);

template <typename M, typename F>
void visit_trainable(M& m, F&& f) {
  f(std::string("connector.w1"), m.connector.w1);
  f(std::string("connector.b1"), m.connector.b1);
  f(std::string("connector.w2"), m.connector.w2);
  f(std::string("connector.b2"), m.connector.b2);
  f(std::string("scorer.token_embed"), m.scorer.token_embed);
  f(std::string("scorer.position"), m.scorer.position);
  for (std::size_t b = 0; b < m.scorer.blocks.size(); ++b) {
    const std::string prefix = "scorer.block" + std::to_string(b) + ".";
    m.scorer.blocks[b].for_each(
        [&](const char* name, auto& t) { f(prefix + name, t); });
  }
  f(std::string("scorer.final_gamma"), m.scorer.final_gamma);
  f(std::string("scorer.final_beta"), m.scorer.final_beta);
  f(std::string("scorer.head_w"), m.scorer.head_w);
  f(std::string("scorer.head_b"), m.scorer.head_b);
}

template <typename F>
void VerifierModel::for_each_trainable(F&& f) {
  visit_trainable(*this, f);
}

template <typename F>
void VerifierModel::for_each_trainable(F&& f) const {
  visit_trainable(*this, f);
}

template <typename F>
void VerifierModel::for_each_frozen(F&& f) const {
  if (!encoder) return;
  f(std::string("encoder.patch_embed"), encoder->patch_embed);
  f(std::string("encoder.position"), encoder->position);
  for (std::size_t b = 0; b < encoder->blocks.size(); ++b) {
    const std::string prefix = "encoder.block" + std::to_string(b) + ".";
    encoder->blocks[b].for_each(
        [&](const char* name, const numcore::Tensor& t) { f(prefix + name, t); });
  }
}

}  // namespace tapverify::verify
