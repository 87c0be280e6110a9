#include "tapverify/verify/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "tapverify/error.hpp"

namespace tapverify::verify {

using numcore::Tensor;

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'A', 'P', 'V', 'C', 'K', 'P', 'T'};

void put_u64(std::vector<char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

struct Entry {
  std::string name;
  const Tensor* tensor;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const VerifierModel& model,
                     const nlohmann::json& metadata,
                     const std::map<std::string, Tensor>& extras) {
  std::vector<Entry> entries;
  model.for_each_trainable(
      [&](const std::string& name, const Tensor& t) { entries.push_back({name, &t}); });
  model.for_each_frozen(
      [&](const std::string& name, const Tensor& t) { entries.push_back({name, &t}); });
  if (model.stats) {
    entries.push_back({"stats.mean", &model.stats->mean});
    entries.push_back({"stats.variance", &model.stats->variance});
  }
  for (const auto& [name, t] : extras) entries.push_back({"extra." + name, &t});

  nlohmann::json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["config"] = model.config();
  header["metadata"] = metadata;
  header["stats"] = model.stats ? nlohmann::json{{"sample_count", model.stats->sample_count}}
                                : nlohmann::json(nullptr);
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    tensors.push_back({{"name", e.name}, {"shape", e.tensor->shape()}, {"offset", offset}});
    offset += e.tensor->size();
  }
  header["tensors"] = std::move(tensors);
  const std::string text = header.dump();

  std::vector<char> bytes(kMagic.begin(), kMagic.end());
  put_u64(bytes, text.size());
  bytes.insert(bytes.end(), text.begin(), text.end());
  bytes.reserve(bytes.size() + offset * 8);
  for (const auto& e : entries) {
    for (double v : e.tensor->data()) put_u64(bytes, std::bit_cast<std::uint64_t>(v));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw IoError("not a verifier checkpoint: " + path.string());
  }
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (16 + header_len > bytes.size()) throw IoError("truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16,
                                   bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed checkpoint header: ") + e.what());
  }
  if (header.value("format_version", 0) != kCheckpointFormatVersion) {
    throw IoError("unsupported checkpoint format version");
  }
  const char* data = bytes.data() + 16 + header_len;
  const std::uint64_t data_len = bytes.size() - 16 - header_len;

  std::map<std::string, Tensor> tensors;
  for (const auto& t : header.at("tensors")) {
    const numcore::Shape shape = t.at("shape").get<numcore::Shape>();
    const std::uint64_t offset = t.at("offset").get<std::uint64_t>();
    const std::size_t n = numcore::shape_size(shape);
    if ((offset + n) * 8 > data_len) throw IoError("truncated checkpoint data");
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = std::bit_cast<double>(get_u64(data + (offset + i) * 8));
    }
    tensors.emplace(t.at("name").get<std::string>(), Tensor(shape, std::move(values)));
  }

  Checkpoint ckpt{VerifierModel(header.at("config").get<VerifierConfig>()),
                  header.value("metadata", nlohmann::json::object()),
                  {}};
  auto take = [&](const std::string& name, Tensor& dst) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("checkpoint lacks tensor " + name);
    if (it->second.shape() != dst.shape()) {
      throw IoError("checkpoint tensor " + name + " has shape " +
                    numcore::shape_to_string(it->second.shape()) + ", expected " +
                    numcore::shape_to_string(dst.shape()));
    }
    dst = std::move(it->second);
    tensors.erase(it);
  };
  ckpt.model.for_each_trainable([&](const std::string& name, Tensor& t) { take(name, t); });
  if (ckpt.model.encoder) {
    auto& e = *ckpt.model.encoder;
    take("encoder.patch_embed", e.patch_embed);
    take("encoder.position", e.position);
    for (std::size_t b = 0; b < e.blocks.size(); ++b) {
      const std::string prefix = "encoder.block" + std::to_string(b) + ".";
      e.blocks[b].for_each([&](const char* name, Tensor& t) { take(prefix + name, t); });
    }
  }
  if (header.contains("stats") && !header["stats"].is_null()) {
    scenes::FeatureStats stats;
    stats.sample_count = header["stats"].at("sample_count").get<std::size_t>();
    stats.mean = std::move(tensors.at("stats.mean"));
    stats.variance = std::move(tensors.at("stats.variance"));
    tensors.erase("stats.mean");
    tensors.erase("stats.variance");
    ckpt.model.stats = std::move(stats);
  }
  const std::string prefix = "extra.";
  for (auto& [name, t] : tensors) {
    if (name.rfind(prefix, 0) == 0) ckpt.extras.emplace(name.substr(prefix.size()), std::move(t));
  }
  return ckpt;
}

}  // namespace tapverify::verify
