#include "tapverify/verify/features.hpp"

#include "tapverify/error.hpp"
#include "tapverify/scenes/render.hpp"

namespace tapverify::verify {

using numcore::MeterContext;
using numcore::Tensor;

Tensor raw_features(VerifierMode mode, const toygen::Generator& generator,
                    const toygen::GeneratorState& state, MeterContext& ctx) {
  switch (mode) {
    case VerifierMode::kHiddenState:
      return generator.tapped_features(state, ctx);
    case VerifierMode::kAeLatent:
      return generator.export_ae_latent(state);
    case VerifierMode::kPixelReencode: {
      if (!state.completed()) {
        throw StateError("pixel features require a completed generator run");
      }
      const toygen::RenderedImage image = generator.decode(state, ctx);
      Tensor patches = scenes::patchify(image.pixels, generator.config().patch_size);
      ctx.track(patches);
      return patches;
    }
  }
  throw InvalidArgument("unknown verifier mode");
}

Tensor prepare_inputs(const VerifierModel& model, const Tensor& raw, MeterContext& ctx) {
  switch (model.mode()) {
    case VerifierMode::kHiddenState: {
      if (!model.stats) return raw;
      Tensor out = scenes::normalize(raw, *model.stats);
      ctx.add_flops(2ULL * out.size());
      numcore::detail::finish(out, ctx, "normalize");
      return out;
    }
    case VerifierMode::kAeLatent:
      return raw;
    case VerifierMode::kPixelReencode:
      return encode_patches(*model.encoder, raw, ctx);
  }
  throw InvalidArgument("unknown verifier mode");
}

Tensor extract_features(const VerifierModel& model, const toygen::Generator& generator,
                        const toygen::GeneratorState& state, MeterContext& ctx) {
  return prepare_inputs(model, raw_features(model.mode(), generator, state, ctx), ctx);
}

}  // namespace tapverify::verify
