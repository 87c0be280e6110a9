#pragma once

#include <cstddef>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "tapverify/scenes/prompt.hpp"

namespace tapverify::toygen {

struct GeneratorConfig {
  std::size_t num_layers = 8;
  std::size_t model_width = 64;
  std::size_t mlp_width = 128;
  std::size_t image_size = 16;   // G, pixels per side
  std::size_t patch_size = 4;    // pixels per cell side
  std::size_t tap_layer = 3;     // index in [0, num_layers - 1]
  double corruption_rate = 0.0;  // p
  double noise_scale = 0.1;      // stddev of the noise latent
  double block_scale = 0.15;     // stddev multiplier of the block weights
  std::uint64_t weight_seed = 7;

  std::size_t grid() const { return image_size / patch_size; }
  std::size_t image_tokens() const { return grid() * grid(); }
  std::size_t prompt_tokens() const { return scenes::kPromptLength; }
  std::size_t num_tokens() const { return image_tokens() + prompt_tokens(); }
  // Channels of the terminal latent: one per pixel value of a patch.
  std::size_t latent_channels() const { return patch_size * patch_size * 3; }

  // Throws InvalidArgument on an inconsistent configuration.
  void validate() const;

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
// Missing fields keep their defaults; the result is validated.
void from_json(const nlohmann::json& j, GeneratorConfig& c);

// Tokens an autoencoder latent yields after flattening its spatial grid.
std::size_t ae_latent_tokens(std::size_t image_resolution, std::size_t spatial_compression);

}  // namespace tapverify::toygen
