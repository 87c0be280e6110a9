#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace tapverify::scenes {

enum class ShapeId : std::uint8_t { kCube, kBall, kCross, kRing };
enum class ColorId : std::uint8_t { kRed, kGreen, kBlue, kYellow, kMagenta, kCyan };

inline constexpr int kNumShapes = 4;
inline constexpr int kNumColors = 6;

std::string_view shape_name(ShapeId shape);
std::string_view shape_plural(ShapeId shape);
std::string_view color_name(ColorId color);
std::array<double, 3> color_rgb(ColorId color);

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct SceneObject {
  ShapeId shape = ShapeId::kCube;
  ColorId color = ColorId::kRed;
  Cell cell;
  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

// Objects placed on a `grid` x `grid` board of cells; one object per cell.
struct Scene {
  int grid = 4;
  std::vector<SceneObject> objects;

  bool occupied(Cell cell) const;
  std::vector<Cell> free_cells() const;
  int count_shape(ShapeId shape) const;
  // Throws InvalidArgument if an object is off the board or two share a cell.
  void validate() const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

}  // namespace tapverify::scenes
