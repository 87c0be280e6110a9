#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tapverify/numcore/attention.hpp"
#include "tapverify/numcore/meter_context.hpp"
#include "tapverify/numcore/tensor.hpp"
#include "tapverify/scenes/prompt.hpp"
#include "tapverify/scenes/scene.hpp"
#include "tapverify/toygen/config.hpp"

namespace tapverify::toygen {

// Decoded candidate, [G x G x 3] with values in [0, 1].
struct RenderedImage {
  numcore::Tensor pixels;
};

// One candidate's progress through the generator. A state is either tapped
// (hidden holds h at the tap layer) or completed (latent holds z_0).
struct GeneratorState {
  scenes::Prompt prompt;
  std::uint64_t seed = 0;
  numcore::Tensor noise_latent;  // z_T, [image_tokens x d]
  numcore::Tensor hidden;        // residual stream after layers_done blocks, [tokens x d]
  std::size_t layers_done = 0;
  std::size_t tap_layer = 0;
  // What this candidate depicts after the corruption gate.
  scenes::Scene rendered_scene;
  bool corrupted = false;
  std::optional<numcore::Tensor> latent;  // z_0, [image_tokens x latent_channels]

  bool completed() const { return latent.has_value(); }
};

// A fixed, hand-constructed single-step generator. Scene content enters at
// layer 0 through an orthonormal patch code; random pre-norm attention
// blocks mix the stream; the final projection and decoder invert the patch
// code. Parameters are immutable after construction, so concurrent calls
// with distinct MeterContexts are safe.
class Generator {
 public:
  explicit Generator(GeneratorConfig config);

  const GeneratorConfig& config() const { return config_; }

  // Corruption gate keyed on (seed, prompt); fires with probability p.
  bool corruption_fires(const scenes::Prompt& prompt, std::uint64_t seed) const;
  scenes::Scene candidate_scene(const scenes::Prompt& prompt, std::uint64_t seed) const;

  // Runs layers 0..tap_layer only.
  GeneratorState generate_tapped(const scenes::Prompt& prompt, std::uint64_t seed,
                                 numcore::MeterContext& ctx) const;
  // Runs the remaining layers and the final projection to z_0.
  // Throws StateError if `state` is already completed.
  GeneratorState complete_latent(const GeneratorState& state,
                                 numcore::MeterContext& ctx) const;
  // Decoder D: z_0 to pixels. Throws StateError on a tapped-only state.
  RenderedImage decode(const GeneratorState& completed, numcore::MeterContext& ctx) const;
  // complete_latent followed by decode.
  RenderedImage resume_and_decode(const GeneratorState& state,
                                  numcore::MeterContext& ctx) const;

  struct FullRun {
    RenderedImage image;
    GeneratorState state;
  };
  FullRun generate_full(const scenes::Prompt& prompt, std::uint64_t seed,
                        numcore::MeterContext& ctx) const;

  // Image-token rows of the tapped stream, [image_tokens x d].
  numcore::Tensor tapped_features(const GeneratorState& state,
                                  numcore::MeterContext& ctx) const;
  // z_0 flattened over spatial positions. Throws StateError unless completed.
  numcore::Tensor export_ae_latent(const GeneratorState& state) const;

  // Closed-form FLOPs of each stage, from the numcore formula table.
  std::uint64_t embed_flops() const;
  std::uint64_t block_flops() const;
  std::uint64_t projection_flops() const;
  std::uint64_t decode_flops() const;
  std::uint64_t tapped_flops() const;
  std::uint64_t resume_flops() const;  // remaining blocks + projection + decode
  std::uint64_t full_flops() const;

 private:
  numcore::Tensor embed(const scenes::Scene& scene, const scenes::Prompt& prompt,
                        const numcore::Tensor& noise, numcore::MeterContext& ctx) const;

  GeneratorConfig config_;
  numcore::Tensor patch_embed_;  // [c x d], orthonormal rows
  numcore::Tensor token_embed_;  // [vocab x d]
  numcore::Tensor position_;     // [tokens x d], orthogonal to the patch code
  numcore::Tensor time_bias_;    // [d], the constant t = 1 conditioning
  numcore::Tensor conflict_;     // [d] unit, orthogonal to the patch code
  std::vector<numcore::BlockParams> blocks_;
  numcore::Tensor projection_;   // [d x c]
  numcore::Tensor unembed_;      // [c x c]
};

}  // namespace tapverify::toygen
