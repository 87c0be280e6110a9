#include "tapverify/verify/score.hpp"

#include <cmath>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"

namespace tapverify::verify {

Score score_from_logits(double yes_logit, double no_logit) {
  // Two-way softmax as a logistic of the margin.
  const double margin = yes_logit - no_logit;
  const double p_yes = margin >= 0.0 ? 1.0 / (1.0 + std::exp(-margin))
                                     : std::exp(margin) / (1.0 + std::exp(margin));
  if (margin >= 0.0) return {scenes::Label::kYes, p_yes};
  return {scenes::Label::kNo, -(1.0 - p_yes)};
}

Score score(const VerifierModel& model, const numcore::Tensor& inputs,
            const std::vector<int>& prompt_tokens, numcore::MeterContext& ctx) {
  const numcore::Tensor logits = verifier_logits(model, inputs, prompt_tokens, ctx);
  return score_from_logits(logits[0], logits[1]);
}

std::size_t select_best(std::span<const Score> scores) {
  if (scores.empty()) throw InvalidArgument("select_best needs at least one score");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].value > scores[best].value) best = i;
  }
  return best;
}

std::size_t select_random_positive(std::span<const Score> scores, std::uint64_t seed) {
  if (scores.empty()) throw InvalidArgument("select_random_positive needs at least one score");
  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].decision == scenes::Label::kYes) positives.push_back(i);
  }
  numcore::Rng rng(seed);
  if (positives.empty()) return static_cast<std::size_t>(rng.below(scores.size()));
  return positives[rng.below(positives.size())];
}

}  // namespace tapverify::verify
