#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "rlab/model.hpp"
#include "rlab/rng.hpp"
#include "rlab/tensor.hpp"

namespace rlab::test {

inline DenseArray random_array(const Shape& shape, std::uint64_t seed, float scale = 1.0f) {
  SeededRng rng(seed);
  DenseArray a = gaussian(rng, shape);
  for (auto& v : a.span()) v *= scale;
  return a;
}

inline DenseArray random_uniform(const Shape& shape, std::uint64_t seed) {
  SeededRng rng(seed);
  DenseArray a(shape);
  for (auto& v : a.span()) v = static_cast<float>(rng.uniform());
  return a;
}

/// Random row-stochastic matrix.
inline DenseArray random_stochastic(int rows, int cols, std::uint64_t seed) {
  DenseArray a = random_uniform(Shape{rows, cols}, seed);
  for (int r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) sum += a.at(r, c);
    for (int c = 0; c < cols; ++c) a.at(r, c) = static_cast<float>(a.at(r, c) / sum);
  }
  return a;
}

inline double max_abs_diff(const DenseArray& a, const DenseArray& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

/// Scratch directory under the build tree, emptied on creation.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("rlab_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace rlab::test
