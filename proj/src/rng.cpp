#include "rlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace rlab {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t SeededRng::next_u64() noexcept {
  ++position_;
  return mix64(seed_ + position_ * kGolden);
}

double SeededRng::uniform() noexcept {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t SeededRng::below(std::uint64_t bound) noexcept {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % bound;
}

double SeededRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(base ^ 0x5EEDF00DULL);
  for (std::uint64_t k : keys) h = mix64(h ^ (k + kGolden + (h << 6) + (h >> 2)));
  return h;
}

DenseArray gaussian(SeededRng& rng, const Shape& shape) {
  DenseArray out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(rng.normal());
  return out;
}

}  // namespace rlab
