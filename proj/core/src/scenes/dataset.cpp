#include "tapverify/scenes/dataset.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "tapverify/error.hpp"
#include "tapverify/numcore/random.hpp"
#include "tapverify/verify/features.hpp"

namespace tapverify::scenes {

using numcore::Tensor;

namespace {

constexpr std::uint64_t kPromptStream = 0x9e0a1;
constexpr std::uint64_t kCandidateStream = 0xca7d1;

template <typename E, int N>
E parse_enum(const std::string& name, std::string_view (*namer)(E), const char* what) {
  for (int i = 0; i < N; ++i) {
    if (namer(static_cast<E>(i)) == name) return static_cast<E>(i);
  }
  throw IoError(std::string("unknown ") + what + " '" + name + "'");
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(b, 4);
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

std::vector<LabeledSample> synthesize(const toygen::Generator& generator, VerifierMode mode,
                                      const std::vector<Prompt>& prompts,
                                      std::size_t candidates, std::uint64_t seed,
                                      const std::string& id_prefix) {
  std::vector<LabeledSample> out;
  out.reserve(prompts.size() * candidates);
  numcore::MeterContext ctx = numcore::MeterContext::disabled();
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    for (std::size_t c = 0; c < candidates; ++c) {
      LabeledSample s;
      s.id = id_prefix + std::to_string(p) + "-" + std::to_string(c);
      s.prompt = prompts[p];
      s.seed = numcore::derive_seed({seed, kCandidateStream, p, c});
      toygen::GeneratorState state = generator.generate_tapped(s.prompt, s.seed, ctx);
      if (mode != VerifierMode::kHiddenState) state = generator.complete_latent(state, ctx);
      s.features = verify::raw_features(mode, generator, state, ctx);
      s.label = oracle_check(s.prompt, state.rendered_scene);
      s.targets = attribute_targets(state.rendered_scene);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace

AttributeTargets attribute_targets(const Scene& scene) {
  const std::size_t cells = static_cast<std::size_t>(scene.grid * scene.grid);
  AttributeTargets t{std::vector<int>(cells, vocab::kEmpty), std::vector<int>(cells, vocab::kEmpty)};
  for (const auto& o : scene.objects) {
    const auto idx = static_cast<std::size_t>(o.cell.row * scene.grid + o.cell.col);
    t.shapes[idx] = vocab::shape(o.shape);
    t.colors[idx] = vocab::color(o.color);
  }
  return t;
}

std::vector<LabeledSample> synthesize_finetune_set(const toygen::Generator& generator,
                                                   VerifierMode mode,
                                                   const SynthesisConfig& config) {
  if (config.candidates_per_prompt == 0) {
    throw InvalidArgument("candidates_per_prompt must be at least 1");
  }
  const auto grid = static_cast<int>(generator.config().grid());
  const auto prompts = sample_prompts(config.prompt_count,
                                      numcore::derive_seed({config.seed, kPromptStream}), grid);
  return synthesize(generator, mode, prompts, config.candidates_per_prompt, config.seed, "ft-");
}

std::vector<LabeledSample> synthesize_alignment_set(const toygen::Generator& generator,
                                                    VerifierMode mode, std::size_t count,
                                                    std::uint64_t seed) {
  const auto grid = static_cast<int>(generator.config().grid());
  const auto prompts = sample_prompts(count, numcore::derive_seed({seed, kPromptStream}), grid);
  return synthesize(generator, mode, prompts, 1, seed, "al-");
}

void to_json(nlohmann::json& j, const Scene& scene) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"shape", std::string(shape_name(o.shape))},
                       {"color", std::string(color_name(o.color))},
                       {"row", o.cell.row},
                       {"col", o.cell.col}});
  }
  j = nlohmann::json{{"grid", scene.grid}, {"objects", std::move(objects)}};
}

void from_json(const nlohmann::json& j, Scene& scene) {
  scene.grid = j.at("grid").get<int>();
  scene.objects.clear();
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.shape = parse_enum<ShapeId, kNumShapes>(o.at("shape").get<std::string>(), shape_name,
                                                "shape");
    obj.color = parse_enum<ColorId, kNumColors>(o.at("color").get<std::string>(), color_name,
                                                "color");
    obj.cell = {o.at("row").get<int>(), o.at("col").get<int>()};
    scene.objects.push_back(obj);
  }
}

void to_json(nlohmann::json& j, const Prompt& prompt) {
  const PromptSpec& s = prompt.spec;
  j = nlohmann::json{{"text", prompt.text()},
                     {"tokens", prompt.tokens()},
                     {"spec",
                      {{"category", std::string(category_name(s.category))},
                       {"shape_a", std::string(shape_name(s.shape_a))},
                       {"shape_b", std::string(shape_name(s.shape_b))},
                       {"color_a", std::string(color_name(s.color_a))},
                       {"color_b", std::string(color_name(s.color_b))},
                       {"count", s.count},
                       {"relation", std::string(relation_name(s.relation))}}},
                     {"target", prompt.target}};
}

void from_json(const nlohmann::json& j, Prompt& prompt) {
  const auto& s = j.at("spec");
  const auto category = parse_category(s.at("category").get<std::string>());
  if (!category) throw IoError("unknown category in dataset record");
  prompt.spec.category = *category;
  prompt.spec.shape_a =
      parse_enum<ShapeId, kNumShapes>(s.at("shape_a").get<std::string>(), shape_name, "shape");
  prompt.spec.shape_b =
      parse_enum<ShapeId, kNumShapes>(s.at("shape_b").get<std::string>(), shape_name, "shape");
  prompt.spec.color_a =
      parse_enum<ColorId, kNumColors>(s.at("color_a").get<std::string>(), color_name, "color");
  prompt.spec.color_b =
      parse_enum<ColorId, kNumColors>(s.at("color_b").get<std::string>(), color_name, "color");
  prompt.spec.count = s.at("count").get<int>();
  prompt.spec.relation =
      parse_enum<Relation, 4>(s.at("relation").get<std::string>(), relation_name, "relation");
  prompt.target = j.at("target").get<Scene>();
}

void write_dataset(const std::filesystem::path& stem, const std::vector<LabeledSample>& samples) {
  std::ofstream jsonl(with_suffix(stem, ".jsonl"), std::ios::trunc);
  std::ofstream blob(with_suffix(stem, ".bin"), std::ios::binary | std::ios::trunc);
  if (!jsonl || !blob) throw IoError("cannot write dataset at " + stem.string());
  std::uint64_t offset = 0;
  for (const auto& s : samples) {
    const auto rows = static_cast<std::uint32_t>(s.features.rows());
    const auto cols = static_cast<std::uint32_t>(s.features.cols());
    put_u32(blob, rows);
    put_u32(blob, cols);
    for (double v : s.features.data()) put_u32(blob, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    nlohmann::json rec{{"id", s.id},
                       {"prompt", s.prompt},
                       {"category", std::string(category_name(s.category()))},
                       {"seed", s.seed},
                       {"label", std::string(label_name(s.label))},
                       {"feature_ref", {{"offset", offset}, {"rows", rows}, {"cols", cols}}},
                       {"targets", {{"shapes", s.targets.shapes}, {"colors", s.targets.colors}}}};
    jsonl << rec.dump() << '\n';
    offset += 8 + 4ULL * rows * cols;
  }
  if (!jsonl || !blob) throw IoError("failed writing dataset at " + stem.string());
}

std::vector<LabeledSample> read_dataset(const std::filesystem::path& stem) {
  std::ifstream jsonl(with_suffix(stem, ".jsonl"));
  std::ifstream blob_in(with_suffix(stem, ".bin"), std::ios::binary);
  if (!jsonl || !blob_in) throw IoError("cannot read dataset at " + stem.string());
  const std::vector<char> blob((std::istreambuf_iterator<char>(blob_in)),
                               std::istreambuf_iterator<char>());
  std::vector<LabeledSample> out;
  std::string line;
  while (std::getline(jsonl, line)) {
    if (line.empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      LabeledSample s;
      s.id = rec.at("id").get<std::string>();
      s.prompt = rec.at("prompt").get<Prompt>();
      s.seed = rec.at("seed").get<std::uint64_t>();
      s.label = rec.at("label").get<std::string>() == label_name(Label::kYes) ? Label::kYes
                                                                                : Label::kNo;
      s.targets.shapes = rec.at("targets").at("shapes").get<std::vector<int>>();
      s.targets.colors = rec.at("targets").at("colors").get<std::vector<int>>();
      const auto& ref = rec.at("feature_ref");
      const auto offset = ref.at("offset").get<std::uint64_t>();
      if (offset + 8 > blob.size()) throw IoError("feature_ref outside blob");
      const std::uint32_t rows = get_u32(blob.data() + offset);
      const std::uint32_t cols = get_u32(blob.data() + offset + 4);
      const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
      if (offset + 8 + 4 * n > blob.size()) throw IoError("truncated feature blob");
      std::vector<double> values(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        values[i] = std::bit_cast<float>(get_u32(blob.data() + offset + 8 + 4 * i));
      }
      s.features = Tensor({rows, cols}, std::move(values));
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed dataset record: ") + e.what());
    }
  }
  return out;
}

Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  numcore::Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.eval.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

}  // namespace tapverify::scenes
