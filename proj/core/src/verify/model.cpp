#include "tapverify/verify/model.hpp"

#include <cmath>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scenes/prompt.hpp"

namespace tapverify::verify {

using numcore::MeterContext;
using numcore::Rng;
using numcore::Tensor;

namespace {

constexpr double kScorerBlockScale = 0.5;
constexpr double kEncoderBlockScale = 1.0;
constexpr double kPositionScale = 0.5;
constexpr double kHeadScale = 0.02;

double fan_in_scale(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

std::size_t VerifierConfig::sequence_length() const {
  return feature_tokens + scenes::kPromptLength + 1;
}

void VerifierConfig::validate() const {
  if (feature_tokens == 0 || in_dim == 0 || connector_hidden == 0 || scorer_width == 0 ||
      scorer_mlp == 0) {
    throw InvalidArgument("verifier widths must be positive");
  }
  if (mode == VerifierMode::kPixelReencode) {
    if (encoder_blocks == 0 || encoder_width == 0 || encoder_mlp == 0 || patch_channels == 0) {
      throw InvalidArgument("the pixel verifier needs an encoder of depth >= 1");
    }
    if (in_dim != encoder_width) {
      throw InvalidArgument("pixel verifier in_dim must equal encoder_width");
    }
  }
}

VerifierConfig VerifierConfig::for_generator(VerifierMode mode,
                                             const toygen::GeneratorConfig& gen) {
  VerifierConfig c;
  c.mode = mode;
  c.tap_layer = gen.tap_layer;
  c.feature_tokens = gen.image_tokens();
  c.patch_channels = gen.latent_channels();
  switch (mode) {
    case VerifierMode::kHiddenState: c.in_dim = gen.model_width; break;
    case VerifierMode::kAeLatent: c.in_dim = gen.latent_channels(); break;
    case VerifierMode::kPixelReencode: c.in_dim = c.encoder_width; break;
  }
  return c;
}

void to_json(nlohmann::json& j, const VerifierConfig& c) {
  j = nlohmann::json{{"mode", std::string(mode_name(c.mode))},
                     {"tap_layer", c.tap_layer},
                     {"feature_tokens", c.feature_tokens},
                     {"in_dim", c.in_dim},
                     {"connector_hidden", c.connector_hidden},
                     {"scorer_width", c.scorer_width},
                     {"scorer_blocks", c.scorer_blocks},
                     {"scorer_mlp", c.scorer_mlp},
                     {"patch_channels", c.patch_channels},
                     {"encoder_blocks", c.encoder_blocks},
                     {"encoder_width", c.encoder_width},
                     {"encoder_mlp", c.encoder_mlp},
                     {"init_seed", c.init_seed}};
}

void from_json(const nlohmann::json& j, VerifierConfig& c) {
  VerifierConfig d;
  const std::string mode = j.value("mode", std::string(mode_name(d.mode)));
  const auto parsed = parse_mode(mode);
  if (!parsed) throw InvalidArgument("unknown verifier mode '" + mode + "'");
  c.mode = *parsed;
  c.tap_layer = j.value("tap_layer", d.tap_layer);
  c.feature_tokens = j.value("feature_tokens", d.feature_tokens);
  c.in_dim = j.value("in_dim", d.in_dim);
  c.connector_hidden = j.value("connector_hidden", d.connector_hidden);
  c.scorer_width = j.value("scorer_width", d.scorer_width);
  c.scorer_blocks = j.value("scorer_blocks", d.scorer_blocks);
  c.scorer_mlp = j.value("scorer_mlp", d.scorer_mlp);
  c.patch_channels = j.value("patch_channels", d.patch_channels);
  c.encoder_blocks = j.value("encoder_blocks", d.encoder_blocks);
  c.encoder_width = j.value("encoder_width", d.encoder_width);
  c.encoder_mlp = j.value("encoder_mlp", d.encoder_mlp);
  c.init_seed = j.value("init_seed", d.init_seed);
  c.validate();
}

Tensor connector_forward(const Connector& c, const Tensor& x, MeterContext& ctx,
                         ConnectorTrace* trace) {
  if (x.cols() != c.w1.rows()) {
    throw ShapeError("connector expects width " + std::to_string(c.w1.rows()) + ", got " +
                     std::to_string(x.cols()));
  }
  Tensor pre = numcore::linear(x, c.w1, c.b1, ctx);
  Tensor act = numcore::gelu(pre, ctx);
  Tensor out = numcore::linear(act, c.w2, c.b2, ctx);
  if (trace != nullptr) {
    trace->input = x;
    trace->pre_activation = std::move(pre);
    trace->activation = std::move(act);
  }
  return out;
}

Tensor encode_patches(const PixelEncoder& encoder, const Tensor& patches, MeterContext& ctx) {
  Tensor h = numcore::add(numcore::matmul(patches, encoder.patch_embed, ctx), encoder.position,
                          ctx);
  for (const auto& block : encoder.blocks) h = numcore::attention_block(h, block, ctx);
  return h;
}

VerifierModel::VerifierModel(VerifierConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t s = config_.scorer_width;
  Rng rng(config_.init_seed);

  connector.w1 = rng.normal_tensor({config_.in_dim, config_.connector_hidden},
                                   fan_in_scale(config_.in_dim));
  connector.b1 = Tensor({config_.connector_hidden});
  connector.w2 = rng.normal_tensor({config_.connector_hidden, s},
                                   fan_in_scale(config_.connector_hidden));
  connector.b2 = Tensor({s});

  scorer.token_embed = rng.normal_tensor({static_cast<std::size_t>(scenes::vocab::kSize), s}, 1.0);
  scorer.position = rng.normal_tensor({config_.sequence_length(), s}, kPositionScale);
  for (std::size_t b = 0; b < config_.scorer_blocks; ++b) {
    scorer.blocks.push_back(
        numcore::BlockParams::random(s, config_.scorer_mlp, kScorerBlockScale, rng));
  }
  scorer.final_gamma = Tensor::full({s}, 1.0);
  scorer.final_beta = Tensor({s});
  scorer.head_w = rng.normal_tensor({s, 2}, kHeadScale);
  scorer.head_b = Tensor({2});

  if (config_.mode == VerifierMode::kPixelReencode) {
    // Separate stream so the trainable parameters match across modes.
    Rng enc_rng(numcore::derive_seed({config_.init_seed, 0xE4C0DE}));
    PixelEncoder e;
    const std::size_t w = config_.encoder_width;
    e.patch_embed = enc_rng.normal_tensor({config_.patch_channels, w},
                                          fan_in_scale(config_.patch_channels));
    e.position = enc_rng.normal_tensor({config_.feature_tokens, w}, kPositionScale);
    for (std::size_t b = 0; b < config_.encoder_blocks; ++b) {
      e.blocks.push_back(
          numcore::BlockParams::random(w, config_.encoder_mlp, kEncoderBlockScale, enc_rng));
    }
    encoder = std::move(e);
  }
}

std::size_t VerifierModel::parameter_count() const {
  std::size_t n = 0;
  for_each_trainable([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

Tensor verifier_logits(const VerifierModel& model, const Tensor& inputs,
                       const std::vector<int>& prompt_tokens, MeterContext& ctx,
                       ForwardTrace* trace) {
  const VerifierConfig& cfg = model.config();
  if (inputs.rows() != cfg.feature_tokens) {
    throw ShapeError("verifier expects " + std::to_string(cfg.feature_tokens) +
                     " feature rows, got " + std::to_string(inputs.rows()));
  }
  if (prompt_tokens.size() != scenes::kPromptLength) {
    throw ShapeError("verifier expects " + std::to_string(scenes::kPromptLength) +
                     " prompt tokens");
  }
  Tensor projected =
      connector_forward(model.connector, inputs, ctx, trace ? &trace->connector : nullptr);

  const std::size_t s = cfg.scorer_width;
  std::vector<int> tokens = prompt_tokens;
  tokens.push_back(scenes::vocab::kAnswer);
  Tensor text({tokens.size(), s});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || tokens[i] >= scenes::vocab::kSize) {
      throw InvalidArgument("prompt token " + std::to_string(tokens[i]) + " outside vocabulary");
    }
    const auto src = model.scorer.token_embed.row(static_cast<std::size_t>(tokens[i]));
    std::copy(src.begin(), src.end(), text.row(i).begin());
  }
  Tensor h = numcore::add(numcore::concat_rows({&projected, &text}, ctx), model.scorer.position,
                          ctx);
  if (trace != nullptr) {
    trace->scorer.tokens = tokens;
    trace->scorer.sequence = h;
    trace->scorer.blocks.assign(model.scorer.blocks.size(), {});
  }
  for (std::size_t b = 0; b < model.scorer.blocks.size(); ++b) {
    h = numcore::attention_block(h, model.scorer.blocks[b], ctx,
                                 trace ? &trace->scorer.blocks[b] : nullptr);
  }
  Tensor last = numcore::slice_rows(h, h.rows() - 1, 1, ctx);
  Tensor answer = numcore::layer_norm(last, model.scorer.final_gamma, model.scorer.final_beta,
                                      ctx, trace ? &trace->scorer.final_ln : nullptr);
  Tensor logits = numcore::linear(answer, model.scorer.head_w, model.scorer.head_b, ctx);
  if (trace != nullptr) {
    trace->scorer.last_hidden = std::move(h);
    trace->scorer.answer = std::move(answer);
  }
  return logits;
}

}  // namespace tapverify::verify
