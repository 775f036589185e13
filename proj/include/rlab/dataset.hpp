#pragma once

#include <cstdint>
#include <vector>

#include "rlab/model.hpp"

namespace rlab {

/// Placement of the rendered shape, in pixel units (pixel (x, y) has its
/// centre at (x + 0.5, y + 0.5)). `extent` is the disc radius, the square
/// half-side, or the cross arm half-length; `thickness` is the cross arm
/// half-width.
struct ShapeGeometry {
  float cx = 8.0f;
  float cy = 8.0f;
  float extent = 4.0f;
  float thickness = 1.0f;
};

struct DatasetSample {
  DenseArray image;  // [3 x 16 x 16], values in [0, 1]
  PromptSpec prompt;
  ShapeGeometry geometry;
  float background = 0.0f;
};

/// Procedural coloured shapes on a dark background. Sample i has class
/// i mod 9, so any n that is a multiple of 9 is exactly balanced.
std::vector<DatasetSample> generate_dataset(int n, std::uint64_t seed, int image_size = 16);

/// Colour used for a token, as linear RGB in [0, 1].
std::array<float, 3> token_color(ColorToken color) noexcept;

}  // namespace rlab
