#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "tapverify/numcore/tensor.hpp"
#include "tapverify/verify/model.hpp"

namespace tapverify::verify {

inline constexpr int kCheckpointFormatVersion = 1;

// File layout: 8-byte magic "TAPVCKPT", u64 little-endian header length,
// JSON header (format_version, config, metadata, stats, tensors with name,
// shape and element offset), then every tensor as little-endian f64.
struct Checkpoint {
  VerifierModel model;
  nlohmann::json metadata = nlohmann::json::object();
  // Auxiliary named tensors, e.g. optimizer moments.
  std::map<std::string, numcore::Tensor> extras;
};

void save_checkpoint(const std::filesystem::path& path, const VerifierModel& model,
                     const nlohmann::json& metadata = nlohmann::json::object(),
                     const std::map<std::string, numcore::Tensor>& extras = {});

// Throws IoError on unreadable or malformed files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tapverify::verify
