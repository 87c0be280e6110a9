#include "tapverify/scenes/oracle.hpp"

#include <algorithm>

namespace tapverify::scenes {

std::string_view label_name(Label label) { return label == Label::kYes ? "yes" : "no"; }

namespace {

bool has(const Scene& scene, ShapeId shape) { return scene.count_shape(shape) > 0; }

bool has_colored(const Scene& scene, ShapeId shape, ColorId color) {
  return std::any_of(scene.objects.begin(), scene.objects.end(), [&](const SceneObject& o) {
    return o.shape == shape && o.color == color;
  });
}

}  // namespace

Label oracle_check(const Prompt& prompt, const Scene& scene) {
  prompt.validate();
  scene.validate();
  const PromptSpec& s = prompt.spec;
  bool ok = false;
  switch (s.category) {
    case Category::kSingleObject:
      ok = has(scene, s.shape_a);
      break;
    case Category::kTwoObject:
      ok = has(scene, s.shape_a) && has(scene, s.shape_b);
      break;
    case Category::kCounting:
      ok = scene.count_shape(s.shape_a) == s.count;
      break;
    case Category::kColors:
      ok = has(scene, s.shape_a) &&
           std::all_of(scene.objects.begin(), scene.objects.end(), [&](const SceneObject& o) {
             return o.shape != s.shape_a || o.color == s.color_a;
           });
      break;
    case Category::kPosition:
      for (const auto& a : scene.objects) {
        if (a.shape != s.shape_a) continue;
        for (const auto& b : scene.objects) {
          if (b.shape == s.shape_b && relation_holds(s.relation, a.cell, b.cell)) ok = true;
        }
      }
      break;
    case Category::kColorAttr:
      ok = has_colored(scene, s.shape_a, s.color_a) && has_colored(scene, s.shape_b, s.color_b);
      break;
  }
  return ok ? Label::kYes : Label::kNo;
}

}  // namespace tapverify::scenes
