#include "rlab/dataset.hpp"

#include <cmath>

#include "rlab/error.hpp"
#include "rlab/rng.hpp"

namespace rlab {

std::array<float, 3> token_color(ColorToken color) noexcept {
  switch (color) {
    case ColorToken::red: return {0.9f, 0.15f, 0.1f};
    case ColorToken::green: return {0.1f, 0.85f, 0.2f};
    case ColorToken::blue: return {0.15f, 0.25f, 0.95f};
  }
  return {1.0f, 1.0f, 1.0f};
}

namespace {

bool covers(ShapeToken shape, const ShapeGeometry& g, float px, float py) {
  const float dx = px - g.cx, dy = py - g.cy;
  switch (shape) {
    case ShapeToken::circle: return dx * dx + dy * dy <= g.extent * g.extent;
    case ShapeToken::square: return std::fabs(dx) <= g.extent && std::fabs(dy) <= g.extent;
    case ShapeToken::cross:
      return (std::fabs(dx) <= g.thickness && std::fabs(dy) <= g.extent) ||
             (std::fabs(dy) <= g.thickness && std::fabs(dx) <= g.extent);
  }
  return false;
}

}  // namespace

std::vector<DatasetSample> generate_dataset(int n, std::uint64_t seed, int image_size) {
  if (n <= 0) fail(ErrorKind::domain, "dataset size must be positive");
  const auto prompts = PromptSpec::all();
  const float size = static_cast<float>(image_size);
  std::vector<DatasetSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SeededRng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    DatasetSample s;
    s.prompt = prompts[static_cast<std::size_t>(i % 9)];
    const auto u = [&](float lo, float hi) { return lo + (hi - lo) * static_cast<float>(rng.uniform()); };
    ShapeGeometry& g = s.geometry;
    switch (s.prompt.shape) {
      case ShapeToken::circle: g.extent = u(0.19f, 0.36f) * size; break;
      case ShapeToken::square: g.extent = u(0.16f, 0.33f) * size; break;
      case ShapeToken::cross:
        g.extent = u(0.22f, 0.4f) * size;
        g.thickness = u(0.06f, 0.1f) * size;
        break;
    }
    const float margin = g.extent + 0.5f;
    g.cx = u(margin, size - margin);
    g.cy = u(margin, size - margin);
    s.background = u(0.0f, 0.1f);

    const auto rgb = token_color(s.prompt.color);
    s.image = DenseArray(Shape{3, image_size, image_size});
    for (int y = 0; y < image_size; ++y) {
      for (int x = 0; x < image_size; ++x) {
        const bool inside = covers(s.prompt.shape, g, x + 0.5f, y + 0.5f);
        for (int c = 0; c < 3; ++c) {
          const std::size_t idx = (static_cast<std::size_t>(c) * image_size + y) * image_size + x;
          s.image[idx] = inside ? rgb[static_cast<std::size_t>(c)] : s.background;
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace rlab
