#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tapverify/modes.hpp"
#include "tapverify/scale/cost_model.hpp"

namespace tapverify::scale {

inline constexpr int kProfileSchemaVersion = 1;

// One Best-of-N column of a published cost table.
struct ProfilePoint {
  std::size_t n = 1;
  double time_ms = 0.0;
  std::optional<double> tflops;
  std::optional<double> vram_gb;
};

struct VerifierProfile {
  VerifierMode mode = VerifierMode::kHiddenState;
  std::string label;
  std::optional<std::size_t> tap_layer;
  std::vector<ProfilePoint> points;

  const ProfilePoint* at(std::size_t n) const;
};

// Published costs of one generator with its three verifier variants.
struct PaperProfile {
  std::string name;
  std::string generator;
  std::size_t num_layers = 0;
  std::size_t hidden_positions = 0;
  std::size_t hidden_channels = 0;
  std::size_t ae_resolution = 0;
  std::size_t ae_compression = 0;
  std::size_t ae_channels = 0;
  VerifierMode baseline = VerifierMode::kPixelReencode;
  std::vector<double> budgets_ms;
  std::vector<VerifierProfile> verifiers;

  const VerifierProfile& verifier(VerifierMode mode) const;
};

// Throws IoError on unreadable or malformed files.
PaperProfile load_profile(const std::filesystem::path& path);

// Looks up `<name>.json` under $TAPVERIFY_DATA_DIR/profiles, then the
// source-tree and installed data directories.
PaperProfile load_named_profile(const std::string& name);
std::filesystem::path find_profile(const std::string& name);

// Fits time, FLOPs and memory models from a verifier's points; columns
// without enough points stay zero.
CostModel cost_model_from(const VerifierProfile& profile);

}  // namespace tapverify::scale
