#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "tapverify/modes.hpp"
#include "tapverify/numcore/meter_context.hpp"
#include "tapverify/scenes/prompt.hpp"
#include "tapverify/toygen/generator.hpp"
#include "tapverify/verify/model.hpp"
#include "tapverify/verify/score.hpp"

namespace tapverify::scale {

// A candidate as far as the verifier's mode has run it: tapped for
// hidden_state, completed for ae_latent, completed and decoded for
// pixel_reencode.
struct Candidate {
  const toygen::GeneratorState* state = nullptr;
  const toygen::RenderedImage* image = nullptr;
};

class CandidateVerifier {
 public:
  virtual ~CandidateVerifier() = default;
  virtual VerifierMode mode() const = 0;
  virtual verify::Score score(const toygen::Generator& generator, const Candidate& candidate,
                              numcore::MeterContext& ctx) const = 0;
};

// Trained connector + scorer.
class LearnedVerifier final : public CandidateVerifier {
 public:
  explicit LearnedVerifier(const verify::VerifierModel& model) : model_(&model) {}
  VerifierMode mode() const override { return model_->mode(); }
  verify::Score score(const toygen::Generator& generator, const Candidate& candidate,
                      numcore::MeterContext& ctx) const override;

 private:
  const verify::VerifierModel* model_;
};

// Ground-truth verifier reading the candidate's rendered scene; costs
// nothing. Yes scores 1, No scores -1.
class OracleVerifier final : public CandidateVerifier {
 public:
  explicit OracleVerifier(VerifierMode mode = VerifierMode::kHiddenState) : mode_(mode) {}
  VerifierMode mode() const override { return mode_; }
  verify::Score score(const toygen::Generator& generator, const Candidate& candidate,
                      numcore::MeterContext& ctx) const override;

 private:
  VerifierMode mode_;
};

enum class Selection { kTokenProbability, kRandomPositive, kRandom };
std::string_view selection_name(Selection selection);

struct BestOfNResult {
  scenes::Prompt prompt;
  toygen::RenderedImage image;
  scenes::Scene final_scene;  // read back from the final image
  std::size_t winner = 0;
  std::vector<verify::Score> scores;  // empty for N = 1
  std::size_t resume_calls = 0;
  std::uint64_t flops = 0;
  std::size_t bytes_peak = 0;
};

// Generates N candidates (seeds derived from `seed`), scores them, selects
// one and decodes it. hidden_state candidates stop at the tap and only the
// winner is resumed; other modes run every candidate to z_0 (and decode it
// for pixel_reencode). N = 1 runs the generator once without verification.
// Throws InvalidArgument for N = 0.
BestOfNResult run_best_of_n(const scenes::Prompt& prompt, std::size_t n, std::uint64_t seed,
                            const toygen::Generator& generator,
                            const CandidateVerifier& verifier, Selection selection,
                            numcore::MeterContext& ctx);

std::uint64_t candidate_seed(std::uint64_t seed, std::size_t index);

// Work to bring one candidate to the verifier's stage and score it; the
// winner's completion is not included.
struct CandidateCost {
  std::uint64_t flops = 0;
  std::size_t bytes_peak = 0;
};
CandidateCost measure_candidate_cost(const toygen::Generator& generator,
                                     const CandidateVerifier& verifier,
                                     const scenes::Prompt& prompt, std::uint64_t seed);

}  // namespace tapverify::scale
