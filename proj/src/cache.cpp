#include "rlab/cache.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "rlab/error.hpp"

namespace rlab {

const char* to_string(CachePrecision p) noexcept {
  switch (p) {
    case CachePrecision::f32: return "f32";
    case CachePrecision::f16: return "f16";
    case CachePrecision::i8: return "i8";
  }
  return "?";
}

const char* to_string(ReuseTarget t) noexcept {
  return t == ReuseTarget::attention_maps ? "attention_maps" : "features";
}

CachePrecision parse_precision(std::string_view s) {
  if (s == "f32") return CachePrecision::f32;
  if (s == "f16") return CachePrecision::f16;
  if (s == "i8") return CachePrecision::i8;
  fail(ErrorKind::config, "precision must be f32, f16 or i8 (got '" + std::string(s) + "')");
}

ReuseTarget parse_target(std::string_view s) {
  if (s == "attention_maps" || s == "maps") return ReuseTarget::attention_maps;
  if (s == "features") return ReuseTarget::features;
  fail(ErrorKind::config, "target must be attention_maps or features (got '" + std::string(s) + "')");
}

std::uint16_t float_to_half(float value) noexcept {
  const std::uint32_t x = std::bit_cast<std::uint32_t>(value);
  const std::uint32_t sign = (x >> 16) & 0x8000u;
  const std::uint32_t abs = x & 0x7FFFFFFFu;
  if (abs >= 0x7F800000u) {  // inf / nan
    return static_cast<std::uint16_t>(sign | 0x7C00u | (abs > 0x7F800000u ? 0x200u : 0u));
  }
  if (abs >= 0x477FF000u) return static_cast<std::uint16_t>(sign | 0x7C00u);  // rounds to inf
  if (abs < 0x38800000u) {
    // Subnormal half (or zero): value = m * 2^-24.
    if (abs < 0x33000000u) return static_cast<std::uint16_t>(sign);
    const std::uint32_t exp = abs >> 23;
    const std::uint32_t mant = (abs & 0x7FFFFFu) | 0x800000u;
    const std::uint32_t shift = 126u - exp;  // 14..24
    std::uint32_t half = mant >> shift;
    const std::uint32_t rem = mant & ((1u << shift) - 1u);
    const std::uint32_t halfway = 1u << (shift - 1u);
    if (rem > halfway || (rem == halfway && (half & 1u))) ++half;
    return static_cast<std::uint16_t>(sign | half);
  }
  std::uint32_t half = ((abs >> 23) - 112u) << 10 | ((abs >> 13) & 0x3FFu);
  const std::uint32_t rem = abs & 0x1FFFu;
  if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) ++half;  // carry may bump exponent
  return static_cast<std::uint16_t>(sign | half);
}

float half_to_float(std::uint16_t bits) noexcept {
  const std::uint32_t sign = static_cast<std::uint32_t>(bits & 0x8000u) << 16;
  const std::uint32_t exp = (bits >> 10) & 0x1Fu;
  std::uint32_t mant = bits & 0x3FFu;
  if (exp == 0) {
    if (mant == 0) return std::bit_cast<float>(sign);
    // Normalise the subnormal.
    int e = -1;
    do {
      ++e;
      mant <<= 1;
    } while ((mant & 0x400u) == 0);
    mant &= 0x3FFu;
    return std::bit_cast<float>(sign | static_cast<std::uint32_t>(112 - e) << 23 | mant << 13);
  }
  if (exp == 0x1F) return std::bit_cast<float>(sign | 0x7F800000u | mant << 13);
  return std::bit_cast<float>(sign | (exp + 112u) << 23 | mant << 13);
}

QuantizedTensor quantize_i8(std::span<const float> values) {
  QuantizedTensor q;
  float max_abs = 0.0f;
  for (float v : values) max_abs = std::max(max_abs, std::fabs(v));
  q.scale = max_abs / 127.0f;
  q.values.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Default rounding mode is round-half-to-even.
    const float r = q.scale > 0.0f ? std::nearbyint(values[i] / q.scale) : 0.0f;
    q.values[i] = static_cast<std::int8_t>(std::clamp(r, -127.0f, 127.0f));
  }
  return q;
}

std::vector<float> dequantize_i8(const QuantizedTensor& q) {
  std::vector<float> out(q.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(q.values[i]) * q.scale;
  return out;
}

AttentionCache::AttentionCache(const ModelDims& dims, ReuseTarget target) : dims_(dims), target_(target) {}

Shape AttentionCache::payload_shape(AttentionSite site) const {
  if (target_ == ReuseTarget::features) return Shape{dims_.tokens(), dims_.width};
  const int keys = site.layer == LayerId::self_attn ? dims_.tokens() : ModelDims::kPromptTokens;
  return Shape{dims_.tokens(), keys};
}

void AttentionCache::store(AttentionSite site, const DenseArray& payload, int step, CachePrecision precision) {
  const Shape expected = payload_shape(site);
  if (!(payload.shape() == expected)) {
    fail(ErrorKind::dimension, "cache payload for " + site.name() + " must be " + expected.str() + ", got " +
                                   payload.shape().str());
  }
  Cell& cell = cells_[static_cast<std::size_t>(site.index())];
  if (cell.written && step <= cell.provenance) {
    fail(ErrorKind::reuse_violation, "cache provenance must increase (" + std::to_string(cell.provenance) +
                                         " -> " + std::to_string(step) + ")");
  }
  cell.f32.clear();
  cell.f16.clear();
  cell.i8 = {};
  switch (precision) {
    case CachePrecision::f32: cell.f32 = payload.values(); break;
    case CachePrecision::f16:
      cell.f16.resize(payload.size());
      for (std::size_t i = 0; i < payload.size(); ++i) cell.f16[i] = float_to_half(payload[i]);
      break;
    case CachePrecision::i8: cell.i8 = quantize_i8(payload.span()); break;
  }
  cell.written = true;
  cell.precision = precision;
  cell.provenance = step;
  cell.shape = expected;
}

DenseArray AttentionCache::fetch(AttentionSite site) const {
  const Cell& cell = cells_[static_cast<std::size_t>(site.index())];
  if (!cell.written) fail(ErrorKind::reuse_violation, "cache cell " + site.name() + " read before first write");
  if (cell.precision == CachePrecision::f32) return DenseArray(cell.shape, cell.f32);

  std::vector<float> values;
  if (cell.precision == CachePrecision::f16) {
    values.resize(cell.f16.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = half_to_float(cell.f16[i]);
  } else {
    values = dequantize_i8(cell.i8);
  }
  DenseArray out(cell.shape, std::move(values));
  if (target_ == ReuseTarget::attention_maps) {
    for (int i = 0; i < out.rows(); ++i) {
      float* row = out.row(i);
      double sum = 0.0;
      for (int j = 0; j < out.cols(); ++j) sum += row[j];
      if (sum > 0.0) {
        for (int j = 0; j < out.cols(); ++j) row[j] = static_cast<float>(row[j] / sum);
      } else {
        for (int j = 0; j < out.cols(); ++j) row[j] = 1.0f / static_cast<float>(out.cols());
      }
    }
  }
  return out;
}

std::optional<int> AttentionCache::provenance(AttentionSite site) const noexcept {
  const Cell& cell = cells_[static_cast<std::size_t>(site.index())];
  if (!cell.written) return std::nullopt;
  return cell.provenance;
}

std::size_t AttentionCache::bytes_used() const noexcept {
  std::size_t n = 0;
  for (const Cell& c : cells_) {
    n += c.f32.size() * 4 + c.f16.size() * 2;
    if (!c.i8.values.empty()) n += c.i8.values.size() + sizeof(float);
  }
  return n;
}

std::size_t cache_memory_bytes(const ReuseConfig& config, const ModelDims& dims) {
  const AttentionCache layout(dims, config.target);
  std::size_t total = 0;
  for (int i = 0; i < AttentionSite::kCount; ++i) {
    const std::size_t elems = layout.payload_shape(AttentionSite::from_index(i)).numel();
    switch (config.precision) {
      case CachePrecision::f32: total += elems * 4; break;
      case CachePrecision::f16: total += elems * 2; break;
      case CachePrecision::i8: total += elems + sizeof(float); break;
    }
  }
  return total;
}

}  // namespace rlab
