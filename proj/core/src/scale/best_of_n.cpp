#include "tapverify/scale/best_of_n.hpp"

#include <optional>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/scenes/oracle.hpp"
#include "tapverify/scenes/render.hpp"
#include "tapverify/verify/features.hpp"

namespace tapverify::scale {

using numcore::MeterContext;
using numcore::Tensor;

namespace {

constexpr std::uint64_t kCandidateStream = 0xb0a1;
constexpr std::uint64_t kSelectionStream = 0x5e1ec7;

struct PreparedCandidate {
  toygen::GeneratorState state;
  std::optional<toygen::RenderedImage> image;
};

// Runs the generator as far as the verifier's mode needs.
PreparedCandidate prepare_candidate(const toygen::Generator& generator, VerifierMode mode,
                                    const scenes::Prompt& prompt, std::uint64_t seed,
                                    MeterContext& ctx) {
  PreparedCandidate c{generator.generate_tapped(prompt, seed, ctx), std::nullopt};
  if (mode != VerifierMode::kHiddenState) c.state = generator.complete_latent(c.state, ctx);
  if (mode == VerifierMode::kPixelReencode) c.image = generator.decode(c.state, ctx);
  return c;
}

}  // namespace

std::uint64_t candidate_seed(std::uint64_t seed, std::size_t index) {
  return numcore::derive_seed({seed, kCandidateStream, index});
}

std::string_view selection_name(Selection selection) {
  switch (selection) {
    case Selection::kTokenProbability: return "token_probability";
    case Selection::kRandomPositive: return "random_positive";
    case Selection::kRandom: return "random";
  }
  return "?";
}

verify::Score LearnedVerifier::score(const toygen::Generator& generator,
                                     const Candidate& candidate, MeterContext& ctx) const {
  Tensor raw;
  if (model_->mode() == VerifierMode::kPixelReencode && candidate.image != nullptr) {
    raw = scenes::patchify(candidate.image->pixels, generator.config().patch_size);
    ctx.track(raw);
  } else {
    raw = verify::raw_features(model_->mode(), generator, *candidate.state, ctx);
  }
  const Tensor inputs = verify::prepare_inputs(*model_, raw, ctx);
  return verify::score(*model_, inputs, candidate.state->prompt.tokens(), ctx);
}

verify::Score OracleVerifier::score(const toygen::Generator&, const Candidate& candidate,
                                    MeterContext&) const {
  const auto label = scenes::oracle_check(candidate.state->prompt, candidate.state->rendered_scene);
  return label == scenes::Label::kYes ? verify::Score{label, 1.0} : verify::Score{label, -1.0};
}

BestOfNResult run_best_of_n(const scenes::Prompt& prompt, std::size_t n, std::uint64_t seed,
                            const toygen::Generator& generator,
                            const CandidateVerifier& verifier, Selection selection,
                            MeterContext& ctx) {
  if (n == 0) throw InvalidArgument("Best-of-N needs N >= 1");
  const std::uint64_t flops_before = ctx.flops();
  ctx.reset_peak();
  BestOfNResult result;
  result.prompt = prompt;

  if (n == 1) {
    auto run = generator.generate_full(prompt, candidate_seed(seed, 0), ctx);
    result.image = std::move(run.image);
  } else {
    const VerifierMode mode = verifier.mode();
    std::vector<PreparedCandidate> candidates;
    candidates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      candidates.push_back(
          prepare_candidate(generator, mode, prompt, candidate_seed(seed, i), ctx));
    }
    for (const auto& pc : candidates) {
      Candidate c{&pc.state, pc.image ? &*pc.image : nullptr};
      result.scores.push_back(verifier.score(generator, c, ctx));
    }
    const std::uint64_t pick_seed = numcore::derive_seed({seed, kSelectionStream});
    switch (selection) {
      case Selection::kTokenProbability:
        result.winner = verify::select_best(result.scores);
        break;
      case Selection::kRandomPositive:
        result.winner = verify::select_random_positive(result.scores, pick_seed);
        break;
      case Selection::kRandom:
        result.winner = static_cast<std::size_t>(numcore::Rng(pick_seed).below(n));
        break;
    }
    switch (mode) {
      case VerifierMode::kHiddenState:
        result.image = generator.resume_and_decode(candidates[result.winner].state, ctx);
        result.resume_calls = 1;
        break;
      case VerifierMode::kAeLatent:
        result.image = generator.decode(candidates[result.winner].state, ctx);
        break;
      case VerifierMode::kPixelReencode:
        result.image = std::move(*candidates[result.winner].image);
        break;
    }
  }
  result.final_scene = scenes::perceive(result.image.pixels, generator.config().patch_size);
  result.flops = ctx.flops() - flops_before;
  result.bytes_peak = ctx.bytes_peak();
  return result;
}

CandidateCost measure_candidate_cost(const toygen::Generator& generator,
                                     const CandidateVerifier& verifier,
                                     const scenes::Prompt& prompt, std::uint64_t seed) {
  MeterContext ctx;
  const PreparedCandidate pc = prepare_candidate(generator, verifier.mode(), prompt, seed, ctx);
  const Candidate c{&pc.state, pc.image ? &*pc.image : nullptr};
  verifier.score(generator, c, ctx);
  return {ctx.flops(), ctx.bytes_peak()};
}

}  // namespace tapverify::scale
