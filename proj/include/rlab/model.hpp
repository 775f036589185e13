#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlab/tensor.hpp"

namespace rlab {

enum class ShapeToken : std::uint8_t { circle, square, cross };
enum class ColorToken : std::uint8_t { red, green, blue };

/// Conditioning for one denoiser pass. Nine conditioned prompts plus the
/// null prompt used by the unconditional pass of guidance.
struct PromptSpec {
  ShapeToken shape = ShapeToken::circle;
  ColorToken color = ColorToken::red;
  bool is_null = false;

  static PromptSpec null_prompt() noexcept { return PromptSpec{ShapeToken::circle, ColorToken::red, true}; }
  static std::array<PromptSpec, 9> all() noexcept;
  /// "circle-red" style names; "null" for the null prompt.
  static PromptSpec parse(std::string_view name);

  int class_index() const noexcept { return static_cast<int>(shape) * 3 + static_cast<int>(color); }
  std::string name() const;

  friend bool operator==(const PromptSpec& a, const PromptSpec& b) noexcept {
    if (a.is_null || b.is_null) return a.is_null == b.is_null;
    return a.shape == b.shape && a.color == b.color;
  }
};

/// Architecture hyperparameters. The defaults are the production toy model;
/// smaller instances are used for exhaustive gradient checks.
struct ModelDims {
  static constexpr int kPromptTokens = 2;
  // Rows: 3 shape tokens, 3 color tokens, null-shape, null-color.
  static constexpr int kTokenRows = 8;

  int channels = 3;
  int image_size = 16;
  int patch = 2;
  int width = 32;
  int ffn_hidden = 64;
  int timesteps = 1000;

  int grid() const noexcept { return image_size / patch; }
  int tokens() const noexcept { return grid() * grid(); }
  int patch_dim() const noexcept { return channels * patch * patch; }
  Shape image_shape() const { return Shape{channels, image_size, image_size}; }

  void validate() const;
  std::uint64_t architecture_hash() const noexcept;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

template <typename T>
struct BasicWeights {
  ModelDims dims;
  BasicArray<T> patch_in, patch_in_bias, pos_embed, time_table, token_table;
  BasicArray<T> self_q, self_k, self_v, self_o;
  BasicArray<T> cross_q, cross_k, cross_v, cross_o;
  BasicArray<T> ffn_in, ffn_in_bias, ffn_out, ffn_out_bias;
  BasicArray<T> patch_out, patch_out_bias;

  /// Zero-filled tensors with the shapes implied by `dims`.
  static BasicWeights zeros(const ModelDims& dims);

  /// Visits (name, tensor) in the fixed checkpoint order.
  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  std::size_t parameter_count() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& w, F& f) {
    f("patch_in", w.patch_in);
    f("patch_in_bias", w.patch_in_bias);
    f("pos_embed", w.pos_embed);
    f("time_table", w.time_table);
    f("token_table", w.token_table);
    f("self_q", w.self_q);
    f("self_k", w.self_k);
    f("self_v", w.self_v);
    f("self_o", w.self_o);
    f("cross_q", w.cross_q);
    f("cross_k", w.cross_k);
    f("cross_v", w.cross_v);
    f("cross_o", w.cross_o);
    f("ffn_in", w.ffn_in);
    f("ffn_in_bias", w.ffn_in_bias);
    f("ffn_out", w.ffn_out);
    f("ffn_out_bias", w.ffn_out_bias);
    f("patch_out", w.patch_out);
    f("patch_out_bias", w.patch_out_bias);
  }
};

using ModelWeights = BasicWeights<float>;

ModelWeights init_weights(const ModelDims& dims, std::uint64_t seed);

template <typename To, typename From>
BasicWeights<To> weights_cast(const BasicWeights<From>& w);

// ---------------------------------------------------------------------------
// Attention tap points

enum class LayerId : std::uint8_t { self_attn, cross_attn };
enum class PassId : std::uint8_t { conditional, unconditional };

struct AttentionSite {
  LayerId layer = LayerId::self_attn;
  PassId pass = PassId::conditional;

  static constexpr int kCount = 4;
  int index() const noexcept { return static_cast<int>(pass) * 2 + static_cast<int>(layer); }
  static AttentionSite from_index(int i) noexcept {
    return AttentionSite{static_cast<LayerId>(i % 2), static_cast<PassId>(i / 2)};
  }
  std::string name() const;

  friend bool operator==(const AttentionSite&, const AttentionSite&) = default;
};

enum class ReuseTarget : std::uint8_t { attention_maps, features };
enum class AttentionMode : std::uint8_t { compute, reuse, perturb_logits };

/// What one attention site does during a pass.
struct SiteDirective {
  AttentionMode mode = AttentionMode::compute;
  ReuseTarget target = ReuseTarget::attention_maps;
  const DenseArray* cached = nullptr;  // reuse: post-softmax map or block output
  int cached_step = 0;                 // reuse: step that produced `cached`
  float eta = 0.0f;                    // perturb: relative noise scale
  std::uint64_t noise_seed = 0;        // perturb: stream for G

  static SiteDirective compute() noexcept { return {}; }
  static SiteDirective reuse(ReuseTarget target, const DenseArray* cached, int cached_step) noexcept {
    SiteDirective d;
    d.mode = AttentionMode::reuse;
    d.target = target;
    d.cached = cached;
    d.cached_step = cached_step;
    return d;
  }
  static SiteDirective perturb(float eta, std::uint64_t noise_seed) noexcept {
    SiteDirective d;
    d.mode = AttentionMode::perturb_logits;
    d.eta = eta;
    d.noise_seed = noise_seed;
    return d;
  }
};

struct PassDirective {
  SiteDirective self_attn;
  SiteDirective cross_attn;
};

enum class MapSource : std::uint8_t { computed, reused, perturbed };

/// The map (and attention-block output) actually used at one site. For
/// feature reuse the map is not evaluated and `map` is empty.
struct AttentionObservation {
  AttentionSite site;
  int step = 0;  // 1-based sampling step, 0 outside a sampler
  MapSource source = MapSource::computed;
  int provenance_step = 0;  // step whose computation produced the payload
  DenseArray map;
  DenseArray feature;
};

struct NoisePrediction {
  DenseArray eps;
  std::vector<AttentionObservation> observations;  // self, cross
};

/// One denoiser pass: epsilon prediction for image-space `x` at training
/// timestep `t_index` in [1, T]. `prompt.is_null` selects the null tokens
/// and labels the observations as the unconditional pass.
NoisePrediction predict_noise(const ModelWeights& weights, const DenseArray& x, int t_index,
                              const PromptSpec& prompt, const PassDirective& directive = {},
                              int step = 0);

struct GuidedPrediction {
  DenseArray eps;
  DenseArray eps_cond;
  DenseArray eps_uncond;
  std::vector<AttentionObservation> observations;  // 4 sites, indexed by AttentionSite::index()
};

/// eps_uncond + w * (eps_cond - eps_uncond).
GuidedPrediction cfg_predict(const ModelWeights& weights, const DenseArray& x, int t_index,
                             const PromptSpec& prompt, float guidance_scale,
                             const PassDirective& cond = {}, const PassDirective& uncond = {},
                             int step = 0);

// ---------------------------------------------------------------------------
// Training objective

template <typename T>
struct TrainExample {
  BasicArray<T> x_t;
  BasicArray<T> target_eps;
  int t_index = 1;
  PromptSpec prompt;
};

/// Mean squared epsilon error over the batch. When `grad` is non-null it is
/// overwritten with d(loss)/d(weights). Per-example gradients are reduced in
/// batch order, so the result does not depend on the thread count.
template <typename T>
T loss_and_gradient(const BasicWeights<T>& weights, std::span<const TrainExample<T>> batch,
                    BasicWeights<T>* grad);

}  // namespace rlab
