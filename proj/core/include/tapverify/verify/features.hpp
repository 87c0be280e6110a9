#pragma once

#include "tapverify/numcore/meter_context.hpp"
#include "tapverify/numcore/tensor.hpp"
#include "tapverify/toygen/generator.hpp"
#include "tapverify/verify/model.hpp"

namespace tapverify::verify {

// Features as stored in datasets, before any model-specific preparation:
//   hidden_state    image rows of h at the tap, [tokens x d]; needs a tapped state
//   ae_latent       z_0, [tokens x c]; needs a completed state
//   pixel_reencode  patches of the decoded image, [tokens x c]; decodes z_0
// Throws StateError when the state has not run far enough for the mode.
numcore::Tensor raw_features(VerifierMode mode, const toygen::Generator& generator,
                             const toygen::GeneratorState& state, numcore::MeterContext& ctx);

// Maps stored features to connector inputs: normalization for hidden_state,
// the frozen encoder for pixel_reencode, identity for ae_latent.
numcore::Tensor prepare_inputs(const VerifierModel& model, const numcore::Tensor& raw,
                               numcore::MeterContext& ctx);

// raw_features followed by prepare_inputs.
numcore::Tensor extract_features(const VerifierModel& model, const toygen::Generator& generator,
                                 const toygen::GeneratorState& state,
                                 numcore::MeterContext& ctx);

}  // namespace tapverify::verify
