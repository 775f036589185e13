#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rlab/model.hpp"

namespace rlab {

enum class CachePrecision : std::uint8_t { f32, f16, i8 };

struct ReuseConfig {
  ReuseTarget target = ReuseTarget::attention_maps;
  CachePrecision precision = CachePrecision::f32;
};

const char* to_string(CachePrecision p) noexcept;
const char* to_string(ReuseTarget t) noexcept;
CachePrecision parse_precision(std::string_view s);
ReuseTarget parse_target(std::string_view s);

// IEEE binary16 conversion, round-to-nearest-even.
std::uint16_t float_to_half(float value) noexcept;
float half_to_float(std::uint16_t bits) noexcept;

/// Symmetric per-tensor int8: scale = max|x| / 127, round half to even.
struct QuantizedTensor {
  std::vector<std::int8_t> values;
  float scale = 0.0f;
};
QuantizedTensor quantize_i8(std::span<const float> values);
std::vector<float> dequantize_i8(const QuantizedTensor& q);

/// One memory cell per attention site. Payloads are the post-softmax maps
/// or the attention-block outputs, depending on the reuse target.
class AttentionCache {
 public:
  AttentionCache(const ModelDims& dims, ReuseTarget target);

  ReuseTarget target() const noexcept { return target_; }
  Shape payload_shape(AttentionSite site) const;

  /// Encodes `payload` at `precision`. Provenance must strictly increase.
  void store(AttentionSite site, const DenseArray& payload, int step, CachePrecision precision);

  /// Decoded f32 payload. Dequantized attention maps are renormalized per
  /// row. Throws ErrorKind::reuse_violation for an unwritten cell.
  DenseArray fetch(AttentionSite site) const;

  bool written(AttentionSite site) const noexcept { return cells_[static_cast<std::size_t>(site.index())].written; }
  /// Step that wrote the cell's current contents.
  std::optional<int> provenance(AttentionSite site) const noexcept;
  /// Bytes currently held (payload + per-tensor int8 scale).
  std::size_t bytes_used() const noexcept;

 private:
  struct Cell {
    bool written = false;
    CachePrecision precision = CachePrecision::f32;
    int provenance = 0;
    Shape shape;
    std::vector<float> f32;
    std::vector<std::uint16_t> f16;
    QuantizedTensor i8;
  };

  ModelDims dims_;
  ReuseTarget target_;
  std::array<Cell, AttentionSite::kCount> cells_{};
};

/// Bytes needed to cache every site once: element count x bytes per element
/// (4 / 2 / 1), plus a 4-byte float scale per tensor for int8.
std::size_t cache_memory_bytes(const ReuseConfig& config, const ModelDims& dims);

}  // namespace rlab
