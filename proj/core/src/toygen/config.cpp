#include "tapverify/toygen/config.hpp"

#include <string>

#include "tapverify/error.hpp"

namespace tapverify::toygen {

void GeneratorConfig::validate() const {
  if (num_layers == 0) throw InvalidArgument("num_layers must be positive");
  if (tap_layer >= num_layers) {
    throw InvalidArgument("tap_layer " + std::to_string(tap_layer) + " outside [0, " +
                          std::to_string(num_layers - 1) + "]");
  }
  if (!(corruption_rate >= 0.0 && corruption_rate <= 1.0)) {
    throw InvalidArgument("corruption_rate must lie in [0, 1]");
  }
  if (patch_size == 0 || image_size == 0 || image_size % patch_size != 0) {
    throw InvalidArgument("image_size must be a positive multiple of patch_size");
  }
  if (model_width < latent_channels() + 1) {
    // The scene code needs its own subspace plus room for position codes.
    throw InvalidArgument("model_width must exceed patch_size^2 * 3 = " +
                          std::to_string(latent_channels()));
  }
  if (mlp_width == 0) throw InvalidArgument("mlp_width must be positive");
  if (noise_scale < 0.0 || block_scale < 0.0) {
    throw InvalidArgument("noise_scale and block_scale must be non-negative");
  }
}

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = nlohmann::json{{"num_layers", c.num_layers},
                     {"model_width", c.model_width},
                     {"mlp_width", c.mlp_width},
                     {"image_size", c.image_size},
                     {"patch_size", c.patch_size},
                     {"tap_layer", c.tap_layer},
                     {"corruption_rate", c.corruption_rate},
                     {"noise_scale", c.noise_scale},
                     {"block_scale", c.block_scale},
                     {"weight_seed", c.weight_seed}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  GeneratorConfig d;
  c.num_layers = j.value("num_layers", d.num_layers);
  c.model_width = j.value("model_width", d.model_width);
  c.mlp_width = j.value("mlp_width", d.mlp_width);
  c.image_size = j.value("image_size", d.image_size);
  c.patch_size = j.value("patch_size", d.patch_size);
  c.tap_layer = j.value("tap_layer", d.tap_layer);
  c.corruption_rate = j.value("corruption_rate", d.corruption_rate);
  c.noise_scale = j.value("noise_scale", d.noise_scale);
  c.block_scale = j.value("block_scale", d.block_scale);
  c.weight_seed = j.value("weight_seed", d.weight_seed);
  c.validate();
}

std::size_t ae_latent_tokens(std::size_t image_resolution, std::size_t spatial_compression) {
  if (spatial_compression == 0 || image_resolution % spatial_compression != 0) {
    throw InvalidArgument("resolution must be a multiple of the spatial compression");
  }
  const std::size_t side = image_resolution / spatial_compression;
  return side * side;
}

}  // namespace tapverify::toygen
