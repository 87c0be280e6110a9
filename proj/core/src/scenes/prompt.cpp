#include "tapverify/scenes/prompt.hpp"

#include <sstream>

#include "tapverify/error.hpp"

namespace tapverify::scenes {

namespace {

ShapeId random_shape(numcore::Rng& rng) {
  return static_cast<ShapeId>(rng.below(kNumShapes));
}

ColorId random_color(numcore::Rng& rng) {
  return static_cast<ColorId>(rng.below(kNumColors));
}

ShapeId other_shape(ShapeId avoid_a, ShapeId avoid_b, numcore::Rng& rng) {
  std::vector<ShapeId> options;
  for (int s = 0; s < kNumShapes; ++s) {
    const auto id = static_cast<ShapeId>(s);
    if (id != avoid_a && id != avoid_b) options.push_back(id);
  }
  return options[rng.below(options.size())];
}

ColorId other_color(ColorId avoid, numcore::Rng& rng) {
  const auto offset = 1 + rng.below(kNumColors - 1);
  return static_cast<ColorId>((static_cast<int>(avoid) + offset) % kNumColors);
}

Cell random_free_cell(const Scene& scene, numcore::Rng& rng) {
  const auto cells = scene.free_cells();
  if (cells.empty()) throw InvalidArgument("scene has no free cell");
  return cells[rng.below(cells.size())];
}

std::string_view number_word(int n) {
  switch (n) {
    case 2: return "two";
    case 3: return "three";
    case 4: return "four";
    case 5: return "five";
    default: return "some";
  }
}

}  // namespace

std::string_view category_name(Category category) {
  switch (category) {
    case Category::kSingleObject: return "single_object";
    case Category::kTwoObject: return "two_object";
    case Category::kCounting: return "counting";
    case Category::kColors: return "colors";
    case Category::kPosition: return "position";
    case Category::kColorAttr: return "color_attr";
  }
  return "?";
}

std::string_view category_header(Category category) {
  switch (category) {
    case Category::kSingleObject: return "Single";
    case Category::kTwoObject: return "Two";
    case Category::kCounting: return "Counting";
    case Category::kColors: return "Color";
    case Category::kPosition: return "Position";
    case Category::kColorAttr: return "Attribution";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view relation_name(Relation relation) {
  switch (relation) {
    case Relation::kLeftOf: return "left of";
    case Relation::kRightOf: return "right of";
    case Relation::kAbove: return "above";
    case Relation::kBelow: return "below";
  }
  return "?";
}

bool relation_holds(Relation relation, Cell a, Cell b) {
  switch (relation) {
    case Relation::kLeftOf: return a.col < b.col;
    case Relation::kRightOf: return a.col > b.col;
    case Relation::kAbove: return a.row < b.row;
    case Relation::kBelow: return a.row > b.row;
  }
  return false;
}

std::string Prompt::text() const {
  std::ostringstream os;
  os << "a photo of ";
  switch (spec.category) {
    case Category::kSingleObject:
      os << "a " << shape_name(spec.shape_a);
      break;
    case Category::kTwoObject:
      os << "a " << shape_name(spec.shape_a) << " and a " << shape_name(spec.shape_b);
      break;
    case Category::kCounting:
      os << number_word(spec.count) << ' ' << shape_plural(spec.shape_a);
      break;
    case Category::kColors:
      os << "a " << color_name(spec.color_a) << ' ' << shape_name(spec.shape_a);
      break;
    case Category::kPosition:
      os << "a " << shape_name(spec.shape_a) << ' ' << relation_name(spec.relation)
         << " a " << shape_name(spec.shape_b);
      break;
    case Category::kColorAttr:
      os << "a " << color_name(spec.color_a) << ' ' << shape_name(spec.shape_a)
         << " and a " << color_name(spec.color_b) << ' ' << shape_name(spec.shape_b);
      break;
  }
  return os.str();
}

std::vector<int> Prompt::tokens() const {
  std::vector<int> t{vocab::category(spec.category)};
  switch (spec.category) {
    case Category::kSingleObject:
      t.push_back(vocab::shape(spec.shape_a));
      break;
    case Category::kTwoObject:
      t.push_back(vocab::shape(spec.shape_a));
      t.push_back(vocab::shape(spec.shape_b));
      break;
    case Category::kCounting:
      t.push_back(vocab::count(spec.count));
      t.push_back(vocab::shape(spec.shape_a));
      break;
    case Category::kColors:
      t.push_back(vocab::color(spec.color_a));
      t.push_back(vocab::shape(spec.shape_a));
      break;
    case Category::kPosition:
      t.push_back(vocab::shape(spec.shape_a));
      t.push_back(vocab::relation(spec.relation));
      t.push_back(vocab::shape(spec.shape_b));
      break;
    case Category::kColorAttr:
      t.push_back(vocab::color(spec.color_a));
      t.push_back(vocab::shape(spec.shape_a));
      t.push_back(vocab::color(spec.color_b));
      t.push_back(vocab::shape(spec.shape_b));
      break;
  }
  t.resize(kPromptLength, vocab::kPad);
  return t;
}

void Prompt::validate() const {
  target.validate();
  switch (spec.category) {
    case Category::kCounting:
      if (spec.count < kMinCount || spec.count > kMaxCount) {
        throw InvalidArgument("counting prompt needs a count in [" +
                              std::to_string(kMinCount) + ", " +
                              std::to_string(kMaxCount) + "], got " +
                              std::to_string(spec.count));
      }
      break;
    case Category::kTwoObject:
    case Category::kPosition:
      if (spec.shape_a == spec.shape_b) {
        throw InvalidArgument("two-object prompts need distinct object kinds");
      }
      break;
    case Category::kColorAttr:
      if (spec.shape_a == spec.shape_b) {
        throw InvalidArgument("attribute-binding prompt needs distinct object kinds");
      }
      if (spec.color_a == spec.color_b) {
        throw InvalidArgument("attribute-binding prompt binds a distinct colour per object");
      }
      break;
    case Category::kSingleObject:
    case Category::kColors:
      break;
  }
}

Prompt sample_prompt(Category category, numcore::Rng& rng, int grid) {
  Prompt p;
  p.spec.category = category;
  p.target.grid = grid;
  auto place = [&](ShapeId shape, ColorId color) {
    const Cell cell = random_free_cell(p.target, rng);
    p.target.objects.push_back({shape, color, cell});
  };
  switch (category) {
    case Category::kSingleObject:
      p.spec.shape_a = random_shape(rng);
      place(p.spec.shape_a, random_color(rng));
      break;
    case Category::kTwoObject:
      p.spec.shape_a = random_shape(rng);
      p.spec.shape_b = other_shape(p.spec.shape_a, p.spec.shape_a, rng);
      place(p.spec.shape_a, random_color(rng));
      place(p.spec.shape_b, random_color(rng));
      break;
    case Category::kCounting: {
      p.spec.shape_a = random_shape(rng);
      p.spec.count = kMinCount + static_cast<int>(rng.below(kMaxCount - kMinCount + 1));
      const ColorId color = random_color(rng);
      for (int i = 0; i < p.spec.count; ++i) place(p.spec.shape_a, color);
      break;
    }
    case Category::kColors:
      p.spec.shape_a = random_shape(rng);
      p.spec.color_a = random_color(rng);
      place(p.spec.shape_a, p.spec.color_a);
      break;
    case Category::kPosition: {
      p.spec.shape_a = random_shape(rng);
      p.spec.shape_b = other_shape(p.spec.shape_a, p.spec.shape_a, rng);
      p.spec.relation = static_cast<Relation>(rng.below(4));
      Cell a, b;
      do {
        a = {static_cast<int>(rng.below(grid)), static_cast<int>(rng.below(grid))};
        b = {static_cast<int>(rng.below(grid)), static_cast<int>(rng.below(grid))};
      } while (a == b || !relation_holds(p.spec.relation, a, b));
      p.target.objects.push_back({p.spec.shape_a, random_color(rng), a});
      p.target.objects.push_back({p.spec.shape_b, random_color(rng), b});
      break;
    }
    case Category::kColorAttr:
      p.spec.shape_a = random_shape(rng);
      p.spec.shape_b = other_shape(p.spec.shape_a, p.spec.shape_a, rng);
      p.spec.color_a = random_color(rng);
      p.spec.color_b = other_color(p.spec.color_a, rng);
      place(p.spec.shape_a, p.spec.color_a);
      place(p.spec.shape_b, p.spec.color_b);
      break;
  }
  p.validate();
  return p;
}

std::vector<Prompt> sample_prompts(std::size_t count, std::uint64_t seed, int grid) {
  numcore::Rng rng(numcore::derive_seed({seed, 0x9a0b7ULL}));
  std::vector<Prompt> prompts;
  prompts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    prompts.push_back(sample_prompt(kAllCategories[i % kNumCategories], rng, grid));
  }
  return prompts;
}

Scene corrupt_scene(const Prompt& prompt, numcore::Rng& rng) {
  Scene scene = prompt.target;
  auto& objs = scene.objects;
  const PromptSpec& s = prompt.spec;
  switch (s.category) {
    case Category::kSingleObject:
      objs[0].shape = other_shape(s.shape_a, s.shape_a, rng);
      break;
    case Category::kTwoObject: {
      auto& victim = objs[rng.below(2)];
      victim.shape = other_shape(s.shape_a, s.shape_b, rng);
      break;
    }
    case Category::kCounting: {
      const bool add = rng.below(2) == 0;
      if (add) {
        SceneObject extra = objs.front();
        extra.cell = random_free_cell(scene, rng);
        objs.push_back(extra);
      } else {
        objs.erase(objs.begin() + static_cast<std::ptrdiff_t>(rng.below(objs.size())));
      }
      break;
    }
    case Category::kColors:
      objs[0].color = other_color(s.color_a, rng);
      break;
    case Category::kPosition: {
      // Move the first object to a free cell where the relation fails.
      std::vector<Cell> options;
      for (const Cell& c : scene.free_cells()) {
        if (!relation_holds(s.relation, c, objs[1].cell)) options.push_back(c);
      }
      objs[0].cell = options[rng.below(options.size())];
      break;
    }
    case Category::kColorAttr: {
      const std::size_t which = rng.below(2);
      const ColorId bound = which == 0 ? s.color_a : s.color_b;
      objs[which].color = other_color(bound, rng);
      break;
    }
  }
  return scene;
}

std::uint64_t prompt_key(const Prompt& prompt) {
  std::string key = prompt.text();
  for (const auto& o : prompt.target.objects) {
    key += '|';
    key += std::to_string(static_cast<int>(o.shape));
    key += ',';
    key += std::to_string(static_cast<int>(o.color));
    key += ',';
    key += std::to_string(o.cell.row);
    key += ',';
    key += std::to_string(o.cell.col);
  }
  return numcore::fnv1a64(key);
}

}  // namespace tapverify::scenes
