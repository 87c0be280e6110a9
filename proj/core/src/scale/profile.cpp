#include "tapverify/scale/profile.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tapverify/error.hpp"

namespace tapverify::scale {

const ProfilePoint* VerifierProfile::at(std::size_t n) const {
  for (const auto& p : points) {
    if (p.n == n) return &p;
  }
  return nullptr;
}

const VerifierProfile& PaperProfile::verifier(VerifierMode mode) const {
  for (const auto& v : verifiers) {
    if (v.mode == mode) return v;
  }
  throw InvalidArgument("profile '" + name + "' has no " + std::string(mode_name(mode)) +
                        " verifier");
}

PaperProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile: " + path.string());
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("schema_version", 0) != kProfileSchemaVersion) {
      throw IoError("unsupported profile schema in " + path.string());
    }
    PaperProfile p;
    p.name = j.at("name").get<std::string>();
    p.generator = j.value("generator", std::string());
    p.num_layers = j.value("num_layers", std::size_t{0});
    if (j.contains("hidden")) {
      p.hidden_positions = j["hidden"].at("positions").get<std::size_t>();
      p.hidden_channels = j["hidden"].at("channels").get<std::size_t>();
    }
    if (j.contains("ae")) {
      p.ae_resolution = j["ae"].at("resolution").get<std::size_t>();
      p.ae_compression = j["ae"].at("compression").get<std::size_t>();
      p.ae_channels = j["ae"].value("channels", std::size_t{0});
    }
    const auto baseline = parse_mode(j.at("baseline").get<std::string>());
    if (!baseline) throw IoError("unknown baseline verifier in " + path.string());
    p.baseline = *baseline;
    p.budgets_ms = j.value("budgets_ms", std::vector<double>{});
    for (const auto& [key, v] : j.at("verifiers").items()) {
      const auto mode = parse_mode(key);
      if (!mode) throw IoError("unknown verifier '" + key + "' in " + path.string());
      VerifierProfile vp;
      vp.mode = *mode;
      vp.label = v.value("label", key);
      if (v.contains("tap_layer")) vp.tap_layer = v["tap_layer"].get<std::size_t>();
      for (const auto& pt : v.at("points")) {
        ProfilePoint point;
        point.n = pt.at("n").get<std::size_t>();
        point.time_ms = pt.at("time_ms").get<double>();
        if (pt.contains("tflops")) point.tflops = pt["tflops"].get<double>();
        if (pt.contains("vram_gb")) point.vram_gb = pt["vram_gb"].get<double>();
        vp.points.push_back(point);
      }
      p.verifiers.push_back(std::move(vp));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed profile " + path.string() + ": " + e.what());
  }
}

std::filesystem::path find_profile(const std::string& name) {
  std::vector<std::filesystem::path> roots;
  if (const char* env = std::getenv("TAPVERIFY_DATA_DIR"); env != nullptr && *env != '\0') {
    roots.emplace_back(env);
  }
#ifdef TAPVERIFY_DEFAULT_DATA_DIR
  roots.emplace_back(TAPVERIFY_DEFAULT_DATA_DIR);
#endif
#ifdef TAPVERIFY_INSTALLED_DATA_DIR
  roots.emplace_back(TAPVERIFY_INSTALLED_DATA_DIR);
#endif
  for (const auto& root : roots) {
    const auto candidate = root / "profiles" / (name + ".json");
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw IoError("profile '" + name + "' not found (set TAPVERIFY_DATA_DIR)");
}

PaperProfile load_named_profile(const std::string& name) { return load_profile(find_profile(name)); }

CostModel cost_model_from(const VerifierProfile& profile) {
  CostModel model;
  std::vector<CostPoint> time, flops, mem;
  for (const auto& p : profile.points) {
    time.push_back({p.n, p.time_ms});
    if (p.tflops) flops.push_back({p.n, *p.tflops});
    if (p.vram_gb) mem.push_back({p.n, *p.vram_gb});
  }
  auto fit_or_single = [](const std::vector<CostPoint>& pts) {
    if (pts.size() >= 3) return fit_affine(pts).cost;
    AffineCost c;
    for (const auto& p : pts) {
      if (p.n == 1) c.single = p.value;
    }
    return c;
  };
  model.time_ms = fit_or_single(time);
  model.flops = fit_or_single(flops);
  model.memory = fit_or_single(mem);
  return model;
}

}  // namespace tapverify::scale
