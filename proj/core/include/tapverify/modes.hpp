#pragma once

#include <optional>
#include <string_view>

namespace tapverify {

// Which generator signal a verifier consumes.
enum class VerifierMode {
  kPixelReencode,  // decoded image re-encoded by a visual encoder
  kAeLatent,       // terminal latent z_0, before pixel decoding
  kHiddenState,    // residual stream at the tap layer
};

std::string_view mode_name(VerifierMode mode);
std::optional<VerifierMode> parse_mode(std::string_view name);

inline std::string_view mode_name(VerifierMode mode) {
  switch (mode) {
    case VerifierMode::kPixelReencode: return "pixel_reencode";
    case VerifierMode::kAeLatent: return "ae_latent";
    case VerifierMode::kHiddenState: return "hidden_state";
  }
  return "?";
}

inline std::optional<VerifierMode> parse_mode(std::string_view name) {
  for (auto m : {VerifierMode::kPixelReencode, VerifierMode::kAeLatent,
                 VerifierMode::kHiddenState}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

}  // namespace tapverify
