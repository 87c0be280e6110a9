#include "tapverify/scenes/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "tapverify/error.hpp"

namespace tapverify::scenes {

namespace {

// 4x4 templates, nearest-neighbour resampled to other patch sizes.
constexpr std::array<std::array<int, 16>, kNumShapes> kTemplates = {{
    {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},  // cube
    {0, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 0},  // ball
    {1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1},  // cross
    {1, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 1},  // ring
}};

constexpr double kLitThreshold = 0.5;

}  // namespace

std::vector<double> shape_mask(ShapeId shape, std::size_t patch) {
  if (patch == 0) throw InvalidArgument("patch size must be positive");
  const auto& tpl = kTemplates[static_cast<std::size_t>(shape)];
  std::vector<double> mask(patch * patch);
  for (std::size_t y = 0; y < patch; ++y) {
    for (std::size_t x = 0; x < patch; ++x) {
      const std::size_t ty = y * 4 / patch, tx = x * 4 / patch;
      mask[y * patch + x] = tpl[ty * 4 + tx];
    }
  }
  return mask;
}

numcore::Tensor render_patches(const Scene& scene, std::size_t patch) {
  scene.validate();
  const auto grid = static_cast<std::size_t>(scene.grid);
  const std::size_t width = patch * patch * 3;
  numcore::Tensor out({grid * grid, width});
  for (const auto& obj : scene.objects) {
    const std::size_t cell = static_cast<std::size_t>(obj.cell.row) * grid +
                             static_cast<std::size_t>(obj.cell.col);
    const auto mask = shape_mask(obj.shape, patch);
    const auto rgb = color_rgb(obj.color);
    auto row = out.row(cell);
    for (std::size_t p = 0; p < patch * patch; ++p) {
      for (std::size_t ch = 0; ch < 3; ++ch) row[p * 3 + ch] = mask[p] * rgb[ch];
    }
  }
  return out;
}

numcore::Tensor render_image(const Scene& scene, std::size_t patch) {
  return unpatchify(render_patches(scene, patch), static_cast<std::size_t>(scene.grid),
                    patch);
}

numcore::Tensor patchify(const numcore::Tensor& image, std::size_t patch) {
  if (image.rank() != 3 || image.dim(2) != 3 || image.dim(0) != image.dim(1) ||
      patch == 0 || image.dim(0) % patch != 0) {
    throw ShapeError("patchify: expected [G x G x 3] with G divisible by the patch, got " +
                     numcore::shape_to_string(image.shape()));
  }
  const std::size_t size = image.dim(0), grid = size / patch;
  numcore::Tensor out({grid * grid, patch * patch * 3});
  for (std::size_t gy = 0; gy < grid; ++gy) {
    for (std::size_t gx = 0; gx < grid; ++gx) {
      auto row = out.row(gy * grid + gx);
      for (std::size_t y = 0; y < patch; ++y) {
        for (std::size_t x = 0; x < patch; ++x) {
          for (std::size_t ch = 0; ch < 3; ++ch) {
            const std::size_t py = gy * patch + y, px = gx * patch + x;
            row[(y * patch + x) * 3 + ch] = image[(py * size + px) * 3 + ch];
          }
        }
      }
    }
  }
  return out;
}

numcore::Tensor unpatchify(const numcore::Tensor& patches, std::size_t grid,
                           std::size_t patch) {
  if (patches.rank() != 2 || patches.dim(0) != grid * grid ||
      patches.dim(1) != patch * patch * 3) {
    throw ShapeError("unpatchify: expected [" + std::to_string(grid * grid) + " x " +
                     std::to_string(patch * patch * 3) + "], got " +
                     numcore::shape_to_string(patches.shape()));
  }
  const std::size_t size = grid * patch;
  numcore::Tensor image({size, size, 3});
  for (std::size_t gy = 0; gy < grid; ++gy) {
    for (std::size_t gx = 0; gx < grid; ++gx) {
      const auto row = patches.row(gy * grid + gx);
      for (std::size_t y = 0; y < patch; ++y) {
        for (std::size_t x = 0; x < patch; ++x) {
          for (std::size_t ch = 0; ch < 3; ++ch) {
            const std::size_t py = gy * patch + y, px = gx * patch + x;
            image[(py * size + px) * 3 + ch] = row[(y * patch + x) * 3 + ch];
          }
        }
      }
    }
  }
  return image;
}

Scene perceive(const numcore::Tensor& image, std::size_t patch) {
  const numcore::Tensor patches = patchify(image, patch);
  const std::size_t grid = image.dim(0) / patch;
  const std::size_t area = patch * patch;
  Scene scene;
  scene.grid = static_cast<int>(grid);
  std::array<std::vector<double>, kNumShapes> masks;
  for (int s = 0; s < kNumShapes; ++s) masks[s] = shape_mask(static_cast<ShapeId>(s), patch);

  for (std::size_t cell = 0; cell < grid * grid; ++cell) {
    const auto row = patches.row(cell);
    std::vector<double> lit(area, 0.0);
    std::array<double, 3> rgb_sum{};
    std::size_t lit_count = 0;
    for (std::size_t p = 0; p < area; ++p) {
      const double peak = std::max({row[p * 3], row[p * 3 + 1], row[p * 3 + 2]});
      if (peak > kLitThreshold) {
        lit[p] = 1.0;
        ++lit_count;
        for (std::size_t ch = 0; ch < 3; ++ch) rgb_sum[ch] += row[p * 3 + ch];
      }
    }
    if (lit_count * 4 < area) continue;

    int best_shape = 0;
    double best_dist = std::numeric_limits<double>::max();
    for (int s = 0; s < kNumShapes; ++s) {
      double dist = 0.0;
      for (std::size_t p = 0; p < area; ++p) dist += std::abs(lit[p] - masks[s][p]);
      if (dist < best_dist) {
        best_dist = dist;
        best_shape = s;
      }
    }
    int best_color = 0;
    double best_cdist = std::numeric_limits<double>::max();
    for (int c = 0; c < kNumColors; ++c) {
      const auto ref = color_rgb(static_cast<ColorId>(c));
      double dist = 0.0;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double diff = rgb_sum[ch] / static_cast<double>(lit_count) - ref[ch];
        dist += diff * diff;
      }
      if (dist < best_cdist) {
        best_cdist = dist;
        best_color = c;
      }
    }
    scene.objects.push_back({static_cast<ShapeId>(best_shape), static_cast<ColorId>(best_color),
                             {static_cast<int>(cell / grid), static_cast<int>(cell % grid)}});
  }
  return scene;
}

}  // namespace tapverify::scenes
