#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tapverify/numcore/random.hpp"
#include "tapverify/scenes/scene.hpp"

namespace tapverify::scenes {

enum class Category : std::uint8_t {
  kSingleObject,
  kTwoObject,
  kCounting,
  kColors,
  kPosition,
  kColorAttr,
};
inline constexpr int kNumCategories = 6;
inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::kSingleObject, Category::kTwoObject, Category::kCounting,
    Category::kColors,       Category::kPosition,  Category::kColorAttr};

std::string_view category_name(Category category);
// Column header used in accuracy tables ("Single", "Two", ...).
std::string_view category_header(Category category);
std::optional<Category> parse_category(std::string_view name);

enum class Relation : std::uint8_t { kLeftOf, kRightOf, kAbove, kBelow };
std::string_view relation_name(Relation relation);
// Whether `a` stands in `relation` to `b` on grid coordinates.
bool relation_holds(Relation relation, Cell a, Cell b);

inline constexpr int kMinCount = 2;
inline constexpr int kMaxCount = 4;

// Semantic content of a prompt; which fields matter depends on category.
struct PromptSpec {
  Category category = Category::kSingleObject;
  ShapeId shape_a = ShapeId::kCube;
  ShapeId shape_b = ShapeId::kBall;
  ColorId color_a = ColorId::kRed;
  ColorId color_b = ColorId::kBlue;
  int count = 1;
  Relation relation = Relation::kLeftOf;

  friend bool operator==(const PromptSpec&, const PromptSpec&) = default;
};

// Token vocabulary shared by the generator's conditioning stream and the
// verifier's prompt input.
namespace vocab {
inline constexpr int kPad = 0;
inline constexpr int kAnswer = 1;
inline constexpr int kEmpty = 2;
inline constexpr int kCategoryBase = 3;
inline constexpr int kShapeBase = kCategoryBase + kNumCategories;
inline constexpr int kColorBase = kShapeBase + kNumShapes;
inline constexpr int kCountBase = kColorBase + kNumColors;
inline constexpr int kRelationBase = kCountBase + (kMaxCount - kMinCount + 1);
inline constexpr int kSize = kRelationBase + 4;

inline int category(Category c) { return kCategoryBase + static_cast<int>(c); }
inline int shape(ShapeId s) { return kShapeBase + static_cast<int>(s); }
inline int color(ColorId c) { return kColorBase + static_cast<int>(c); }
inline int count(int n) { return kCountBase + (n - kMinCount); }
inline int relation(Relation r) { return kRelationBase + static_cast<int>(r); }
}  // namespace vocab

inline constexpr std::size_t kPromptLength = 5;

struct Prompt {
  PromptSpec spec;
  // Canonical layout an ideal generator renders for this prompt.
  Scene target;

  std::string text() const;
  // Fixed-length attribute tokens, padded with vocab::kPad.
  std::vector<int> tokens() const;
  // Category well-formedness plus a valid target layout.
  void validate() const;

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

Prompt sample_prompt(Category category, numcore::Rng& rng, int grid = 4);
// `count` prompts cycling through the categories in order, so the mix is
// uniform.
std::vector<Prompt> sample_prompts(std::size_t count, std::uint64_t seed, int grid = 4);

// Returns `prompt.target` with exactly one attribute replaced (object kind,
// colour, count or position) such that the result fails the oracle.
Scene corrupt_scene(const Prompt& prompt, numcore::Rng& rng);

// Stable identity of a prompt (spec and layout) for seeding.
std::uint64_t prompt_key(const Prompt& prompt);

}  // namespace tapverify::scenes
