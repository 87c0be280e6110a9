#include "run_context.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "tapverify/error.hpp"

namespace tapverify::cli {

namespace fs = std::filesystem;

namespace {

fs::path output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("runs");
}

}  // namespace

fs::path default_output(const std::string& name) { return output_root() / name; }

void write_json(const fs::path& path, const nlohmann::json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << value.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

RunContext::RunContext(std::string command, const CommonOptions& options)
    : command_(std::move(command)), force_(options.force) {
  config_ = options.config_path.empty() ? nlohmann::json::object()
                                        : read_json(options.config_path);
  if (!config_.is_object()) throw InvalidArgument("config must be a JSON object");
  if (options.seed) config_["seed"] = *options.seed;
  if (!config_.contains("seed")) config_["seed"] = 1;
  if (!config_.contains(section_key())) config_[section_key()] = nlohmann::json::object();

  fs::path out = options.out.empty() ? fs::path(command_) : fs::path(options.out);
  // Relative paths land under the output root only when it is set explicitly.
  if (options.out.empty() || (out.is_relative() && std::getenv(kOutputRootEnv) != nullptr)) {
    out = output_root() / out;
  }
  out_dir_ = out;
}

std::string RunContext::section_key() const {
  std::string key = command_;
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

const nlohmann::json& RunContext::section() const { return config_.at(section_key()); }

toygen::GeneratorConfig RunContext::generator_config() {
  if (!config_.contains("generator")) {
    // The skewed toy task: 63% of candidates satisfy their prompt.
    config_["generator"] = {{"corruption_rate", 0.37}};
  }
  const auto g = config_.at("generator").get<toygen::GeneratorConfig>();
  config_["generator"] = g;
  return g;
}

void RunContext::prepare_output() {
  if (fs::exists(out_dir_)) {
    if (!fs::is_directory(out_dir_)) {
      throw IoError(out_dir_.string() + " exists and is not a directory");
    }
    if (!fs::is_empty(out_dir_) && !force_) {
      throw IoError(out_dir_.string() + " is not empty; pass --force to overwrite");
    }
  }
  fs::create_directories(out_dir_);
}

void RunContext::write_resolved_config() const {
  write_json(out("config.resolved.json"), config_);
}

}  // namespace tapverify::cli
