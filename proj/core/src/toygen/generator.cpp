#include "tapverify/toygen/generator.hpp"

#include <cmath>

#include "tapverify/error.hpp"
#include "tapverify/numcore/flops.hpp"
#include "tapverify/numcore/kernels.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scenes/render.hpp"

namespace tapverify::toygen {

using numcore::MeterContext;
using numcore::Rng;
using numcore::Tensor;

namespace {

constexpr std::uint64_t kGateStream = 0xc0220001ULL;
constexpr std::uint64_t kCorruptionStream = 0xc0220002ULL;
constexpr std::uint64_t kNoiseStream = 0x2a2a0003ULL;
constexpr double kPositionScale = 0.5;
constexpr double kConflictScale = 2.0;

// Rows of a Haar-ish random orthogonal matrix via Gram-Schmidt.
Tensor random_orthogonal(std::size_t n, Rng& rng) {
  Tensor q = rng.normal_tensor({n, n}, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto ri = q.row(i);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto rj = q.row(j);
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += ri[k] * rj[k];
        for (std::size_t k = 0; k < n; ++k) ri[k] -= dot * rj[k];
      }
    }
    double norm = 0.0;
    for (double v : ri) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : ri) v /= norm;
  }
  return q;
}

// Random combination of the basis rows [first, last) of `basis`.
std::vector<double> combine_rows(const Tensor& basis, std::size_t first, std::size_t last,
                                 double scale, Rng& rng) {
  std::vector<double> out(basis.cols(), 0.0);
  for (std::size_t r = first; r < last; ++r) {
    const double a = scale * rng.normal();
    const auto row = basis.row(r);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += a * row[k];
  }
  return out;
}

// Cells whose content differs between the rendered scene and the prompt's
// target; a corrupted candidate always has at least one.
std::vector<bool> conflicting_cells(const scenes::Scene& scene, const scenes::Scene& target) {
  const auto n = static_cast<std::size_t>(scene.grid * scene.grid);
  std::vector<const scenes::SceneObject*> a(n, nullptr), b(n, nullptr);
  for (const auto& o : scene.objects) a[o.cell.row * scene.grid + o.cell.col] = &o;
  for (const auto& o : target.objects) b[o.cell.row * target.grid + o.cell.col] = &o;
  std::vector<bool> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (a[i] == nullptr) != (b[i] == nullptr) ||
             (a[i] && (a[i]->shape != b[i]->shape || a[i]->color != b[i]->color));
  }
  return out;
}

}  // namespace

Generator::Generator(GeneratorConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t d = config_.model_width;
  const std::size_t c = config_.latent_channels();
  Rng rng(config_.weight_seed);

  const Tensor basis = random_orthogonal(d, rng);
  patch_embed_ = Tensor({c, d});
  for (std::size_t r = 0; r < c; ++r) {
    const auto src = basis.row(r);
    std::copy(src.begin(), src.end(), patch_embed_.row(r).begin());
  }

  token_embed_ = rng.normal_tensor({static_cast<std::size_t>(scenes::vocab::kSize), d},
                                   1.0 / std::sqrt(static_cast<double>(d)) * 2.0);

  position_ = Tensor({config_.num_tokens(), d});
  for (std::size_t t = 0; t < config_.num_tokens(); ++t) {
    const auto v = combine_rows(basis, c, d, kPositionScale, rng);
    std::copy(v.begin(), v.end(), position_.row(t).begin());
  }
  time_bias_ = Tensor({d}, combine_rows(basis, c, d, kPositionScale, rng));

  blocks_.reserve(config_.num_layers);
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    blocks_.push_back(numcore::BlockParams::random(d, config_.mlp_width,
                                                   config_.block_scale, rng));
  }

  // z_0 = h * E^T * R and D(z_0) = z_0 * R^T recovers the patch code.
  const Tensor rotation = random_orthogonal(c, rng);
  projection_ = Tensor({d, c});
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) s += patch_embed_(k, i) * rotation(k, j);
      projection_(i, j) = s;
    }
  }
  unembed_ = Tensor({c, c});
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) unembed_(i, j) = rotation(j, i);
  }

  // Drawn last so the weights above do not depend on it.
  std::vector<double> dir = combine_rows(basis, c, d, 1.0, rng);
  double norm = 0.0;
  for (double v : dir) norm += v * v;
  for (double& v : dir) v /= std::sqrt(norm);
  conflict_ = Tensor({d}, std::move(dir));
}

bool Generator::corruption_fires(const scenes::Prompt& prompt, std::uint64_t seed) const {
  Rng gate(numcore::derive_seed({seed, scenes::prompt_key(prompt), kGateStream}));
  return gate.uniform() < config_.corruption_rate;
}

scenes::Scene Generator::candidate_scene(const scenes::Prompt& prompt,
                                         std::uint64_t seed) const {
  if (!corruption_fires(prompt, seed)) return prompt.target;
  Rng pick(numcore::derive_seed({seed, scenes::prompt_key(prompt), kCorruptionStream}));
  return scenes::corrupt_scene(prompt, pick);
}

Tensor Generator::embed(const scenes::Scene& scene, const scenes::Prompt& prompt,
                        const Tensor& noise, MeterContext& ctx) const {
  if (static_cast<std::size_t>(scene.grid) != config_.grid()) {
    throw InvalidArgument("scene grid " + std::to_string(scene.grid) +
                          " does not match generator grid " + std::to_string(config_.grid()));
  }
  const Tensor patches = scenes::render_patches(scene, config_.patch_size);
  Tensor content = numcore::matmul(patches, patch_embed_, ctx);
  Tensor image_rows = numcore::add(content, numcore::scale(noise, config_.noise_scale, ctx), ctx);

  // The conditioning pathway leaves a trace wherever the content departs
  // from what the prompt asked for; it lives outside the patch code, so
  // decoded pixels only see it through block mixing.
  const auto conflicts = conflicting_cells(scene, prompt.target);
  Tensor trace({config_.image_tokens(), config_.model_width});
  for (std::size_t i = 0; i < conflicts.size(); ++i) {
    if (!conflicts[i]) continue;
    for (std::size_t k = 0; k < config_.model_width; ++k) trace(i, k) = kConflictScale * conflict_[k];
  }
  image_rows = numcore::add(image_rows, trace, ctx);

  const auto tokens = prompt.tokens();
  Tensor prompt_rows({tokens.size(), config_.model_width});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto src = token_embed_.row(static_cast<std::size_t>(tokens[i]));
    std::copy(src.begin(), src.end(), prompt_rows.row(i).begin());
  }
  Tensor stream = numcore::concat_rows({&image_rows, &prompt_rows}, ctx);
  return numcore::add_bias(numcore::add(stream, position_, ctx), time_bias_, ctx);
}

GeneratorState Generator::generate_tapped(const scenes::Prompt& prompt, std::uint64_t seed,
                                          MeterContext& ctx) const {
  prompt.validate();
  GeneratorState state;
  state.prompt = prompt;
  state.seed = seed;
  state.tap_layer = config_.tap_layer;
  state.corrupted = corruption_fires(prompt, seed);
  state.rendered_scene = candidate_scene(prompt, seed);

  Rng noise_rng(numcore::derive_seed({seed, kNoiseStream}));
  state.noise_latent = noise_rng.normal_tensor({config_.image_tokens(), config_.model_width}, 1.0);

  Tensor h = embed(state.rendered_scene, prompt, state.noise_latent, ctx);
  for (std::size_t l = 0; l <= config_.tap_layer; ++l) {
    h = numcore::attention_block(h, blocks_[l], ctx);
  }
  state.hidden = std::move(h);
  state.layers_done = config_.tap_layer + 1;
  return state;
}

GeneratorState Generator::complete_latent(const GeneratorState& state,
                                          MeterContext& ctx) const {
  if (state.completed()) throw StateError("generator state is already completed");
  if (state.layers_done != state.tap_layer + 1 || state.tap_layer != config_.tap_layer) {
    throw StateError("generator state was not tapped by this generator configuration");
  }
  GeneratorState out = state;
  Tensor h = state.hidden;
  for (std::size_t l = state.layers_done; l < config_.num_layers; ++l) {
    h = numcore::attention_block(h, blocks_[l], ctx);
  }
  Tensor image_rows = numcore::slice_rows(h, 0, config_.image_tokens(), ctx);
  out.latent = numcore::matmul(image_rows, projection_, ctx);
  out.hidden = std::move(h);
  out.layers_done = config_.num_layers;
  return out;
}

RenderedImage Generator::decode(const GeneratorState& completed, MeterContext& ctx) const {
  if (!completed.completed()) throw StateError("decode needs a completed generator state");
  Tensor patches = numcore::clamp(numcore::matmul(*completed.latent, unembed_, ctx), 0.0, 1.0,
                                  ctx);
  Tensor pixels = scenes::unpatchify(patches, config_.grid(), config_.patch_size);
  ctx.track(pixels);
  return {std::move(pixels)};
}

RenderedImage Generator::resume_and_decode(const GeneratorState& state,
                                           MeterContext& ctx) const {
  return decode(complete_latent(state, ctx), ctx);
}

Generator::FullRun Generator::generate_full(const scenes::Prompt& prompt, std::uint64_t seed,
                                            MeterContext& ctx) const {
  GeneratorState done = complete_latent(generate_tapped(prompt, seed, ctx), ctx);
  RenderedImage image = decode(done, ctx);
  return {std::move(image), std::move(done)};
}

Tensor Generator::tapped_features(const GeneratorState& state, MeterContext& ctx) const {
  if (state.completed() || state.layers_done != config_.tap_layer + 1) {
    throw StateError("hidden features are taken from a tapped state");
  }
  return numcore::slice_rows(state.hidden, 0, config_.image_tokens(), ctx);
}

Tensor Generator::export_ae_latent(const GeneratorState& state) const {
  if (!state.completed()) {
    throw StateError("the AE latent requires a completed generator run");
  }
  return *state.latent;
}

std::uint64_t Generator::embed_flops() const {
  using namespace numcore;
  const std::uint64_t n = config_.image_tokens(), t = config_.num_tokens();
  const std::uint64_t d = config_.model_width, c = config_.latent_channels();
  return flops_for(MatmulOp{n, c, d}) + flops_for(ElementwiseOp{n * d}) * 3 +
         flops_for(ElementwiseOp{t * d}) + flops_for(BiasAddOp{t, d});
}

std::uint64_t Generator::block_flops() const {
  return numcore::flops_for(numcore::AttentionBlockOp{config_.num_tokens(), config_.model_width,
                                                      config_.mlp_width});
}

std::uint64_t Generator::projection_flops() const {
  return numcore::flops_for(numcore::MatmulOp{config_.image_tokens(), config_.model_width,
                                              config_.latent_channels()});
}

std::uint64_t Generator::decode_flops() const {
  const std::uint64_t n = config_.image_tokens(), c = config_.latent_channels();
  return numcore::flops_for(numcore::MatmulOp{n, c, c}) +
         numcore::flops_for(numcore::ElementwiseOp{n * c});
}

std::uint64_t Generator::tapped_flops() const {
  return embed_flops() + (config_.tap_layer + 1) * block_flops();
}

std::uint64_t Generator::resume_flops() const {
  return (config_.num_layers - config_.tap_layer - 1) * block_flops() + projection_flops() +
         decode_flops();
}

std::uint64_t Generator::full_flops() const { return tapped_flops() + resume_flops(); }

}  // namespace tapverify::toygen
