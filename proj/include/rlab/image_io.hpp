#pragma once

#include <filesystem>
#include <vector>

#include "rlab/tensor.hpp"

namespace rlab {

/// Binary PPM (P6, maxval 255). Input is [3 x H x W] in [0, 1]; each channel
/// value is stored as round(clamp(v) * 255).
void write_ppm(const std::filesystem::path& path, const DenseArray& image);

/// Inverse of write_ppm: pixels come back as byte / 255.
DenseArray read_ppm(const std::filesystem::path& path);

/// The bytes write_ppm would store for `image`, channel-interleaved.
std::vector<unsigned char> quantize_pixels(const DenseArray& image);

}  // namespace rlab
