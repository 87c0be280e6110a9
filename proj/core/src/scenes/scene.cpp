#include "tapverify/scenes/scene.hpp"

#include <algorithm>
#include <string>

#include "tapverify/error.hpp"

namespace tapverify::scenes {

std::string_view shape_name(ShapeId shape) {
  switch (shape) {
    case ShapeId::kCube: return "cube";
    case ShapeId::kBall: return "ball";
    case ShapeId::kCross: return "cross";
    case ShapeId::kRing: return "ring";
  }
  return "?";
}

std::string_view shape_plural(ShapeId shape) {
  switch (shape) {
    case ShapeId::kCube: return "cubes";
    case ShapeId::kBall: return "balls";
    case ShapeId::kCross: return "crosses";
    case ShapeId::kRing: return "rings";
  }
  return "?";
}

std::string_view color_name(ColorId color) {
  switch (color) {
    case ColorId::kRed: return "red";
    case ColorId::kGreen: return "green";
    case ColorId::kBlue: return "blue";
    case ColorId::kYellow: return "yellow";
    case ColorId::kMagenta: return "magenta";
    case ColorId::kCyan: return "cyan";
  }
  return "?";
}

std::array<double, 3> color_rgb(ColorId color) {
  switch (color) {
    case ColorId::kRed: return {1.0, 0.0, 0.0};
    case ColorId::kGreen: return {0.0, 1.0, 0.0};
    case ColorId::kBlue: return {0.0, 0.0, 1.0};
    case ColorId::kYellow: return {1.0, 1.0, 0.0};
    case ColorId::kMagenta: return {1.0, 0.0, 1.0};
    case ColorId::kCyan: return {0.0, 1.0, 1.0};
  }
  return {0.0, 0.0, 0.0};
}

bool Scene::occupied(Cell cell) const {
  return std::any_of(objects.begin(), objects.end(),
                     [&](const SceneObject& o) { return o.cell == cell; });
}

std::vector<Cell> Scene::free_cells() const {
  std::vector<Cell> cells;
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      if (!occupied({r, c})) cells.push_back({r, c});
    }
  }
  return cells;
}

int Scene::count_shape(ShapeId shape) const {
  return static_cast<int>(std::count_if(objects.begin(), objects.end(),
                                        [&](const SceneObject& o) { return o.shape == shape; }));
}

void Scene::validate() const {
  if (grid <= 0) throw InvalidArgument("scene grid must be positive");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Cell c = objects[i].cell;
    if (c.row < 0 || c.row >= grid || c.col < 0 || c.col >= grid) {
      throw InvalidArgument("object at (" + std::to_string(c.row) + "," +
                            std::to_string(c.col) + ") is off the board");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (objects[j].cell == c) {
        throw InvalidArgument("two objects share cell (" + std::to_string(c.row) + "," +
                              std::to_string(c.col) + ")");
      }
    }
  }
}

}  // namespace tapverify::scenes
