#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "tapverify/toygen/config.hpp"

namespace tapverify::cli {

// Environment variable that relocates every output directory.
inline constexpr const char* kOutputRootEnv = "TAPVERIFY_OUTPUT_ROOT";

// $TAPVERIFY_OUTPUT_ROOT/<name>, or runs/<name> when the variable is unset.
std::filesystem::path default_output(const std::string& name);

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
};

// Resolved configuration and output directory of one command.
class RunContext {
 public:
  RunContext(std::string command, const CommonOptions& options);

  const std::string& command() const { return command_; }
  const nlohmann::json& config() const { return config_; }
  std::uint64_t seed() const { return config_.at("seed").get<std::uint64_t>(); }
  const std::filesystem::path& out_dir() const { return out_dir_; }

  // The command's own section, or an empty object.
  const nlohmann::json& section() const;
  // Section value or `fallback`; the fallback is recorded in the resolved config.
  template <typename T>
  T get(const std::string& key, const T& fallback) {
    nlohmann::json& s = config_[section_key()];
    if (!s.contains(key)) s[key] = fallback;
    return s.at(key).get<T>();
  }

  toygen::GeneratorConfig generator_config();

  // Creates the output directory, refusing a non-empty one without --force,
  // and writes config.resolved.json into it.
  void prepare_output();
  void write_resolved_config() const;

  std::filesystem::path out(const std::string& name) const { return out_dir_ / name; }

 private:
  std::string section_key() const;

  std::string command_;
  nlohmann::json config_;
  std::filesystem::path out_dir_;
  bool force_ = false;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace tapverify::cli
