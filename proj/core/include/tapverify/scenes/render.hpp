#pragma once

#include <cstddef>
#include <vector>

#include "tapverify/numcore/tensor.hpp"
#include "tapverify/scenes/scene.hpp"

namespace tapverify::scenes {

// 0/1 silhouette of a shape on a patch x patch tile, row-major.
std::vector<double> shape_mask(ShapeId shape, std::size_t patch);

// One row per grid cell (row-major cells), each row the cell's patch
// flattened as (y, x, channel).
numcore::Tensor render_patches(const Scene& scene, std::size_t patch);

// [G x G x 3] raster with G = grid * patch.
numcore::Tensor render_image(const Scene& scene, std::size_t patch);

// Conversions between a [G x G x 3] image and the per-cell patch rows.
numcore::Tensor patchify(const numcore::Tensor& image, std::size_t patch);
numcore::Tensor unpatchify(const numcore::Tensor& patches, std::size_t grid,
                           std::size_t patch);

// Detector analogue: reads back the objects drawn in an image. A cell is
// occupied when at least a quarter of its pixels are lit; the shape is the
// nearest silhouette and the colour the nearest palette entry.
Scene perceive(const numcore::Tensor& image, std::size_t patch);

}  // namespace tapverify::scenes
