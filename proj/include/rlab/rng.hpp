#pragma once

#include <cstdint>
#include <initializer_list>

#include "rlab/tensor.hpp"

namespace rlab {

/// Counter-based generator: the value at stream position i is a pure
/// function of (seed, i), using the SplitMix64 finalizer. Streams for
/// independent purposes are derived with `derive_seed` instead of being
/// sequenced through a shared generator.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t position() const noexcept { return position_; }

  /// Raw 64-bit value at the current position; advances by one.
  std::uint64_t next_u64() noexcept;

  /// Uniform in (0, 1], 53-bit resolution.
  double uniform() noexcept;

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal via Box-Muller on two consecutive uniforms. Both
  /// outputs are used; an odd leftover is cached.
  double normal() noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Hash-combine a base seed with stream keys (prompt, step, site, ...).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) noexcept;

/// i.i.d. standard normal array drawn from `rng`.
DenseArray gaussian(SeededRng& rng, const Shape& shape);

}  // namespace rlab
