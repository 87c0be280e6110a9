#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tapverify/numcore/meter_context.hpp"
#include "tapverify/numcore/tensor.hpp"
#include "tapverify/scenes/oracle.hpp"
#include "tapverify/verify/model.hpp"

namespace tapverify::verify {

// Greedy verdict of the two-class head and its ranking value:
// P(Yes) for a Yes verdict, -P(No) for a No verdict.
struct Score {
  scenes::Label decision = scenes::Label::kNo;
  double value = -1.0;
};

// Equal logits resolve to Yes with value 0.5.
Score score_from_logits(double yes_logit, double no_logit);

// Forward pass on prepared inputs (see prepare_inputs).
Score score(const VerifierModel& model, const numcore::Tensor& inputs,
            const std::vector<int>& prompt_tokens, numcore::MeterContext& ctx);

// Argmax of value, lowest index on ties. Throws InvalidArgument when empty.
std::size_t select_best(std::span<const Score> scores);

// Uniform among Yes verdicts, or among all candidates when none is Yes.
// Throws InvalidArgument when empty.
std::size_t select_random_positive(std::span<const Score> scores, std::uint64_t seed);

}  // namespace tapverify::verify
