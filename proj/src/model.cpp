#include "rlab/model.hpp"

#include <cmath>
#include <cstring>

#include "rlab/error.hpp"
#include "rlab/kernels.hpp"
#include "rlab/rng.hpp"

namespace rlab {

// ---------------------------------------------------------------------------
// Prompts and dims

std::array<PromptSpec, 9> PromptSpec::all() noexcept {
  std::array<PromptSpec, 9> out{};
  for (int i = 0; i < 9; ++i) {
    out[static_cast<std::size_t>(i)] =
        PromptSpec{static_cast<ShapeToken>(i / 3), static_cast<ColorToken>(i % 3), false};
  }
  return out;
}

namespace {

constexpr std::array<const char*, 3> kShapeNames{"circle", "square", "cross"};
constexpr std::array<const char*, 3> kColorNames{"red", "green", "blue"};

}  // namespace

std::string PromptSpec::name() const {
  if (is_null) return "null";
  return std::string(kShapeNames[static_cast<std::size_t>(shape)]) + "-" +
         kColorNames[static_cast<std::size_t>(color)];
}

PromptSpec PromptSpec::parse(std::string_view name) {
  if (name == "null") return null_prompt();
  for (const PromptSpec& p : all()) {
    if (p.name() == name) return p;
  }
  fail(ErrorKind::config, "unknown prompt '" + std::string(name) + "' (expected e.g. circle-red)");
}

void ModelDims::validate() const {
  if (channels <= 0 || image_size <= 0 || patch <= 0 || width <= 0 || ffn_hidden <= 0 || timesteps <= 0 ||
      image_size % patch != 0) {
    fail(ErrorKind::dimension, "invalid model dims");
  }
}

std::uint64_t ModelDims::architecture_hash() const noexcept {
  // FNV-1a over the descriptor string.
  const std::string desc = "rlab-denoiser-v1:c" + std::to_string(channels) + ":i" + std::to_string(image_size) +
                           ":p" + std::to_string(patch) + ":w" + std::to_string(width) + ":f" +
                           std::to_string(ffn_hidden) + ":t" + std::to_string(timesteps) + ":k" +
                           std::to_string(kTokenRows);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : desc) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string AttentionSite::name() const {
  return std::string(layer == LayerId::self_attn ? "self" : "cross") + "/" +
         (pass == PassId::conditional ? "cond" : "uncond");
}

// ---------------------------------------------------------------------------
// Weights

template <typename T>
BasicWeights<T> BasicWeights<T>::zeros(const ModelDims& dims) {
  dims.validate();
  const int d = dims.width;
  BasicWeights<T> w;
  w.dims = dims;
  w.patch_in = BasicArray<T>(Shape{dims.patch_dim(), d});
  w.patch_in_bias = BasicArray<T>(Shape{d});
  w.pos_embed = BasicArray<T>(Shape{dims.tokens(), d});
  w.time_table = BasicArray<T>(Shape{dims.timesteps, d});
  w.token_table = BasicArray<T>(Shape{ModelDims::kTokenRows, d});
  for (auto* m : {&w.self_q, &w.self_k, &w.self_v, &w.self_o, &w.cross_q, &w.cross_k, &w.cross_v, &w.cross_o}) {
    *m = BasicArray<T>(Shape{d, d});
  }
  w.ffn_in = BasicArray<T>(Shape{d, dims.ffn_hidden});
  w.ffn_in_bias = BasicArray<T>(Shape{dims.ffn_hidden});
  w.ffn_out = BasicArray<T>(Shape{dims.ffn_hidden, d});
  w.ffn_out_bias = BasicArray<T>(Shape{d});
  w.patch_out = BasicArray<T>(Shape{d, dims.patch_dim()});
  w.patch_out_bias = BasicArray<T>(Shape{dims.patch_dim()});
  return w;
}

template <typename T>
std::size_t BasicWeights<T>::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const char*, const BasicArray<T>& a) { n += a.size(); });
  return n;
}

ModelWeights init_weights(const ModelDims& dims, std::uint64_t seed) {
  ModelWeights w = ModelWeights::zeros(dims);
  const float d = static_cast<float>(dims.width);
  auto fill = [&](DenseArray& a, std::uint64_t key, float stddev) {
    SeededRng rng(derive_seed(seed, {key}));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = stddev * static_cast<float>(rng.normal());
  };
  fill(w.patch_in, 1, 1.0f / std::sqrt(static_cast<float>(dims.patch_dim())));
  fill(w.pos_embed, 2, 0.1f);
  fill(w.token_table, 3, 0.5f);
  fill(w.self_q, 4, 1.0f / std::sqrt(d));
  fill(w.self_k, 5, 1.0f / std::sqrt(d));
  fill(w.self_v, 6, 1.0f / std::sqrt(d));
  fill(w.self_o, 7, 0.5f / std::sqrt(d));
  fill(w.cross_q, 8, 1.0f / std::sqrt(d));
  fill(w.cross_k, 9, 1.0f / std::sqrt(d));
  fill(w.cross_v, 10, 1.0f / std::sqrt(d));
  fill(w.cross_o, 11, 0.5f / std::sqrt(d));
  fill(w.ffn_in, 12, 1.0f / std::sqrt(d));
  fill(w.ffn_out, 13, 0.5f / std::sqrt(static_cast<float>(dims.ffn_hidden)));
  fill(w.patch_out, 14, 0.5f / std::sqrt(d));
  // Sinusoidal initialisation keeps neighbouring timesteps close before training.
  const int half = dims.width / 2;
  for (int t = 0; t < dims.timesteps; ++t) {
    for (int j = 0; j < half; ++j) {
      const double freq = std::pow(10000.0, -static_cast<double>(j) / std::max(half, 1));
      w.time_table.at(t, j) = 0.5f * static_cast<float>(std::sin((t + 1) * freq));
      w.time_table.at(t, half + j) = 0.5f * static_cast<float>(std::cos((t + 1) * freq));
    }
  }
  return w;
}

template <typename To, typename From>
BasicWeights<To> weights_cast(const BasicWeights<From>& w) {
  BasicWeights<To> out = BasicWeights<To>::zeros(w.dims);
  std::vector<const BasicArray<From>*> src;
  w.for_each([&](const char*, const BasicArray<From>& a) { src.push_back(&a); });
  std::size_t i = 0;
  out.for_each([&](const char*, BasicArray<To>& a) { a = array_cast<To>(*src[i++]); });
  return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

template <typename T>
BasicArray<T> patchify(const ModelDims& dims, const BasicArray<T>& x) {
  if (!(x.shape() == dims.image_shape())) {
    fail(ErrorKind::dimension, "denoiser input must be " + dims.image_shape().str() + ", got " + x.shape().str());
  }
  const int g = dims.grid(), p = dims.patch, s = dims.image_size;
  BasicArray<T> out(Shape{dims.tokens(), dims.patch_dim()});
  for (int gy = 0; gy < g; ++gy)
    for (int gx = 0; gx < g; ++gx)
      for (int c = 0; c < dims.channels; ++c)
        for (int py = 0; py < p; ++py)
          for (int px = 0; px < p; ++px) {
            const std::size_t src = (static_cast<std::size_t>(c) * s + gy * p + py) * s + gx * p + px;
            out.at(gy * g + gx, (c * p + py) * p + px) = x[src];
          }
  return out;
}

template <typename T>
BasicArray<T> unpatchify(const ModelDims& dims, const BasicArray<T>& tokens) {
  const int g = dims.grid(), p = dims.patch, s = dims.image_size;
  BasicArray<T> out(dims.image_shape());
  for (int gy = 0; gy < g; ++gy)
    for (int gx = 0; gx < g; ++gx)
      for (int c = 0; c < dims.channels; ++c)
        for (int py = 0; py < p; ++py)
          for (int px = 0; px < p; ++px) {
            const std::size_t dst = (static_cast<std::size_t>(c) * s + gy * p + py) * s + gx * p + px;
            out[dst] = tokens.at(gy * g + gx, (c * p + py) * p + px);
          }
  return out;
}

std::array<int, 2> prompt_rows(const PromptSpec& prompt) noexcept {
  if (prompt.is_null) return {6, 7};
  return {static_cast<int>(prompt.shape), 3 + static_cast<int>(prompt.color)};
}

template <typename T>
T sigmoid(T u) {
  return T{1} / (T{1} + std::exp(-u));
}

template <typename T>
struct Activations {
  BasicArray<T> patches, h0, q, k, v, a, o, f1, h1;
  BasicArray<T> ctx, q2, k2, v2, a2, o2, f2, h2;
  BasicArray<T> u, g, h3;
  int t_row = 0;
  std::array<int, 2> ctx_rows{};
};

template <typename T>
void perturb_logits(BasicArray<T>& z, const SiteDirective& d) {
  SeededRng rng(d.noise_seed);
  BasicArray<T> noise(z.shape());
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = static_cast<T>(rng.normal());
  double zn = 0.0, gn = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    zn += static_cast<double>(z[i]) * z[i];
    gn += static_cast<double>(noise[i]) * noise[i];
  }
  const T scale = static_cast<T>(d.eta * std::sqrt(zn) / std::sqrt(gn));
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += scale * noise[i];
}

template <typename T>
void scale_inplace(BasicArray<T>& a, T s) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= s;
}

/// Evaluates the attention map for one site, honouring compute / reuse /
/// perturb. Returns the map actually used.
template <typename T>
BasicArray<T> site_map(const BasicArray<T>& q, const BasicArray<T>& k, T inv_sqrt_d, const SiteDirective& d,
                       int queries, int keys) {
  if (d.mode == AttentionMode::reuse) {
    if (d.cached->shape().rank() != 2 || d.cached->rows() != queries || d.cached->cols() != keys) {
      fail(ErrorKind::dimension, "cached map has shape " + d.cached->shape().str());
    }
    if constexpr (std::is_same_v<T, float>) {
      return *d.cached;
    } else {
      return array_cast<T>(*d.cached);
    }
  }
  BasicArray<T> z = matmul_nt(q, k);
  scale_inplace(z, inv_sqrt_d);
  if (d.mode == AttentionMode::perturb_logits) perturb_logits(z, d);
  return softmax_rows(z);
}

template <typename T>
BasicArray<T> cached_feature(const SiteDirective& d, int rows, int cols) {
  if (d.cached->shape().rank() != 2 || d.cached->rows() != rows || d.cached->cols() != cols) {
    fail(ErrorKind::dimension, "cached feature has shape " + d.cached->shape().str());
  }
  if constexpr (std::is_same_v<T, float>) {
    return *d.cached;
  } else {
    return array_cast<T>(*d.cached);
  }
}

void check_directive(const SiteDirective& d) {
  if (d.mode == AttentionMode::reuse && d.cached == nullptr) {
    fail(ErrorKind::reuse_violation, "reuse requested for a site whose cache cell is empty");
  }
}

template <typename T>
BasicArray<T> forward(const BasicWeights<T>& w, const BasicArray<T>& x, int t_index, const PromptSpec& prompt,
                      const PassDirective& dir, Activations<T>& act) {
  const ModelDims& dims = w.dims;
  if (t_index < 1 || t_index > dims.timesteps) {
    fail(ErrorKind::domain, "timestep " + std::to_string(t_index) + " outside [1, " +
                                std::to_string(dims.timesteps) + "]");
  }
  check_directive(dir.self_attn);
  check_directive(dir.cross_attn);
  const T inv_sqrt_d = T{1} / std::sqrt(static_cast<T>(dims.width));
  const int L = dims.tokens(), D = dims.width;

  act.t_row = t_index - 1;
  act.patches = patchify(dims, x);
  act.h0 = matmul(act.patches, w.patch_in);
  add_row_inplace(act.h0, w.patch_in_bias);
  add_inplace(act.h0, w.pos_embed);
  {
    const T* trow = w.time_table.row(act.t_row);
    for (int i = 0; i < L; ++i) {
      T* r = act.h0.row(i);
      for (int j = 0; j < D; ++j) r[j] += trow[j];
    }
  }

  // Self-attention block.
  if (dir.self_attn.mode == AttentionMode::reuse && dir.self_attn.target == ReuseTarget::features) {
    act.f1 = cached_feature<T>(dir.self_attn, L, D);
  } else {
    act.v = matmul(act.h0, w.self_v);
    if (dir.self_attn.mode != AttentionMode::reuse) {
      act.q = matmul(act.h0, w.self_q);
      act.k = matmul(act.h0, w.self_k);
    }
    act.a = site_map(act.q, act.k, inv_sqrt_d, dir.self_attn, L, L);
    act.o = matmul(act.a, act.v);
    act.f1 = matmul(act.o, w.self_o);
  }
  act.h1 = act.h0;
  add_inplace(act.h1, act.f1);

  // Cross-attention over the two prompt tokens.
  act.ctx_rows = prompt_rows(prompt);
  act.ctx = BasicArray<T>(Shape{ModelDims::kPromptTokens, D});
  for (int r = 0; r < ModelDims::kPromptTokens; ++r) {
    const T* src = w.token_table.row(act.ctx_rows[static_cast<std::size_t>(r)]);
    std::copy(src, src + D, act.ctx.row(r));
  }
  if (dir.cross_attn.mode == AttentionMode::reuse && dir.cross_attn.target == ReuseTarget::features) {
    act.f2 = cached_feature<T>(dir.cross_attn, L, D);
  } else {
    act.v2 = matmul(act.ctx, w.cross_v);
    if (dir.cross_attn.mode != AttentionMode::reuse) {
      act.q2 = matmul(act.h1, w.cross_q);
      act.k2 = matmul(act.ctx, w.cross_k);
    }
    act.a2 = site_map(act.q2, act.k2, inv_sqrt_d, dir.cross_attn, L, ModelDims::kPromptTokens);
    act.o2 = matmul(act.a2, act.v2);
    act.f2 = matmul(act.o2, w.cross_o);
  }
  act.h2 = act.h1;
  add_inplace(act.h2, act.f2);

  // Pointwise feed-forward with SiLU.
  act.u = matmul(act.h2, w.ffn_in);
  add_row_inplace(act.u, w.ffn_in_bias);
  act.g = BasicArray<T>(act.u.shape());
  for (std::size_t i = 0; i < act.u.size(); ++i) act.g[i] = act.u[i] * sigmoid(act.u[i]);
  BasicArray<T> ff = matmul(act.g, w.ffn_out);
  add_row_inplace(ff, w.ffn_out_bias);
  act.h3 = act.h2;
  add_inplace(act.h3, ff);

  BasicArray<T> out = matmul(act.h3, w.patch_out);
  add_row_inplace(out, w.patch_out_bias);
  return unpatchify(dims, out);
}

template <typename T>
void accumulate_colsum(BasicArray<T>& bias_grad, const BasicArray<T>& m) {
  for (int i = 0; i < m.rows(); ++i) {
    const T* r = m.row(i);
    for (int j = 0; j < m.cols(); ++j) bias_grad[static_cast<std::size_t>(j)] += r[j];
  }
}

template <typename T>
BasicArray<T> softmax_backward(const BasicArray<T>& a, const BasicArray<T>& da) {
  BasicArray<T> dz(a.shape());
  for (int i = 0; i < a.rows(); ++i) {
    T dot = 0;
    for (int j = 0; j < a.cols(); ++j) dot += a.at(i, j) * da.at(i, j);
    for (int j = 0; j < a.cols(); ++j) dz.at(i, j) = a.at(i, j) * (da.at(i, j) - dot);
  }
  return dz;
}

/// Accumulates d(loss)/d(weights) into `g` given d(loss)/d(eps) for one
/// all-compute forward pass.
template <typename T>
void backward(const BasicWeights<T>& w, const Activations<T>& act, const BasicArray<T>& d_eps, BasicWeights<T>& g) {
  const ModelDims& dims = w.dims;
  const T inv_sqrt_d = T{1} / std::sqrt(static_cast<T>(dims.width));
  const BasicArray<T> d_out = patchify(dims, d_eps);

  add_inplace(g.patch_out, matmul_tn(act.h3, d_out));
  accumulate_colsum(g.patch_out_bias, d_out);
  BasicArray<T> dh = matmul_nt(d_out, w.patch_out);  // d h3

  // Feed-forward.
  add_inplace(g.ffn_out, matmul_tn(act.g, dh));
  accumulate_colsum(g.ffn_out_bias, dh);
  BasicArray<T> du = matmul_nt(dh, w.ffn_out);
  for (std::size_t i = 0; i < du.size(); ++i) {
    const T s = sigmoid(act.u[i]);
    du[i] *= s + act.u[i] * s * (T{1} - s);
  }
  add_inplace(g.ffn_in, matmul_tn(act.h2, du));
  accumulate_colsum(g.ffn_in_bias, du);
  add_inplace(dh, matmul_nt(du, w.ffn_in));  // d h2

  // Cross-attention.
  add_inplace(g.cross_o, matmul_tn(act.o2, dh));
  const BasicArray<T> do2 = matmul_nt(dh, w.cross_o);
  const BasicArray<T> da2 = matmul_nt(do2, act.v2);
  const BasicArray<T> dv2 = matmul_tn(act.a2, do2);
  BasicArray<T> dz2 = softmax_backward(act.a2, da2);
  scale_inplace(dz2, inv_sqrt_d);
  const BasicArray<T> dq2 = matmul(dz2, act.k2);
  const BasicArray<T> dk2 = matmul_tn(dz2, act.q2);
  add_inplace(g.cross_q, matmul_tn(act.h1, dq2));
  add_inplace(g.cross_k, matmul_tn(act.ctx, dk2));
  add_inplace(g.cross_v, matmul_tn(act.ctx, dv2));
  BasicArray<T> dctx = matmul_nt(dk2, w.cross_k);
  add_inplace(dctx, matmul_nt(dv2, w.cross_v));
  for (int r = 0; r < ModelDims::kPromptTokens; ++r) {
    T* dst = g.token_table.row(act.ctx_rows[static_cast<std::size_t>(r)]);
    const T* src = dctx.row(r);
    for (int j = 0; j < dims.width; ++j) dst[j] += src[j];
  }
  add_inplace(dh, matmul_nt(dq2, w.cross_q));  // d h1

  // Self-attention.
  add_inplace(g.self_o, matmul_tn(act.o, dh));
  const BasicArray<T> d_o = matmul_nt(dh, w.self_o);
  const BasicArray<T> da = matmul_nt(d_o, act.v);
  const BasicArray<T> dv = matmul_tn(act.a, d_o);
  BasicArray<T> dz = softmax_backward(act.a, da);
  scale_inplace(dz, inv_sqrt_d);
  const BasicArray<T> dq = matmul(dz, act.k);
  const BasicArray<T> dk = matmul_tn(dz, act.q);
  add_inplace(g.self_q, matmul_tn(act.h0, dq));
  add_inplace(g.self_k, matmul_tn(act.h0, dk));
  add_inplace(g.self_v, matmul_tn(act.h0, dv));
  add_inplace(dh, matmul_nt(dq, w.self_q));
  add_inplace(dh, matmul_nt(dk, w.self_k));
  add_inplace(dh, matmul_nt(dv, w.self_v));  // d h0

  // Embedding.
  add_inplace(g.patch_in, matmul_tn(act.patches, dh));
  accumulate_colsum(g.patch_in_bias, dh);
  add_inplace(g.pos_embed, dh);
  T* trow = g.time_table.row(act.t_row);
  for (int i = 0; i < dh.rows(); ++i) {
    const T* r = dh.row(i);
    for (int j = 0; j < dims.width; ++j) trow[j] += r[j];
  }
}

AttentionObservation observe(LayerId layer, const PromptSpec& prompt, int step, const SiteDirective& d,
                             const DenseArray& map, const DenseArray& feature) {
  AttentionObservation obs;
  obs.site = AttentionSite{layer, prompt.is_null ? PassId::unconditional : PassId::conditional};
  obs.step = step;
  switch (d.mode) {
    case AttentionMode::compute:
      obs.source = MapSource::computed;
      obs.provenance_step = step;
      break;
    case AttentionMode::reuse:
      obs.source = MapSource::reused;
      obs.provenance_step = d.cached_step;
      break;
    case AttentionMode::perturb_logits:
      obs.source = MapSource::perturbed;
      obs.provenance_step = step;
      break;
  }
  obs.map = map;
  obs.feature = feature;
  return obs;
}

}  // namespace

NoisePrediction predict_noise(const ModelWeights& weights, const DenseArray& x, int t_index,
                              const PromptSpec& prompt, const PassDirective& directive, int step) {
  Activations<float> act;
  NoisePrediction out;
  out.eps = forward(weights, x, t_index, prompt, directive, act);
  if (!out.eps.all_finite()) {
    fail(ErrorKind::numeric, "non-finite denoiser output at timestep " + std::to_string(t_index));
  }
  out.observations.reserve(2);
  out.observations.push_back(observe(LayerId::self_attn, prompt, step, directive.self_attn, act.a, act.f1));
  out.observations.push_back(observe(LayerId::cross_attn, prompt, step, directive.cross_attn, act.a2, act.f2));
  return out;
}

GuidedPrediction cfg_predict(const ModelWeights& weights, const DenseArray& x, int t_index,
                             const PromptSpec& prompt, float guidance_scale, const PassDirective& cond,
                             const PassDirective& uncond, int step) {
  if (!(guidance_scale >= 0.0f)) fail(ErrorKind::domain, "guidance scale must be >= 0");
  PromptSpec conditioned = prompt;
  conditioned.is_null = false;
  NoisePrediction c = predict_noise(weights, x, t_index, conditioned, cond, step);
  NoisePrediction u = predict_noise(weights, x, t_index, PromptSpec::null_prompt(), uncond, step);
  GuidedPrediction out;
  out.eps = DenseArray(x.shape());
  for (std::size_t i = 0; i < out.eps.size(); ++i) {
    // Weighted form so w = 0 and w = 1 return the pass outputs exactly.
    out.eps[i] = (1.0f - guidance_scale) * u.eps[i] + guidance_scale * c.eps[i];
  }
  out.eps_cond = std::move(c.eps);
  out.eps_uncond = std::move(u.eps);
  out.observations.resize(AttentionSite::kCount);
  for (auto* pred : {&c, &u}) {
    for (auto& obs : pred->observations) {
      out.observations[static_cast<std::size_t>(obs.site.index())] = std::move(obs);
    }
  }
  return out;
}

template <typename T>
T loss_and_gradient(const BasicWeights<T>& weights, std::span<const TrainExample<T>> batch, BasicWeights<T>* grad) {
  if (batch.empty()) fail(ErrorKind::domain, "empty training batch");
  const int n = static_cast<int>(batch.size());
  const std::size_t elems = weights.dims.image_shape().numel();
  const T denom = static_cast<T>(elems) * static_cast<T>(n);

  std::vector<double> losses(static_cast<std::size_t>(n), 0.0);
  std::vector<BasicWeights<T>> grads;
  if (grad) grads.assign(static_cast<std::size_t>(n), BasicWeights<T>::zeros(weights.dims));

#pragma omp parallel for schedule(static)
  for (int b = 0; b < n; ++b) {
    const TrainExample<T>& ex = batch[static_cast<std::size_t>(b)];
    Activations<T> act;
    const BasicArray<T> eps = forward(weights, ex.x_t, ex.t_index, ex.prompt, PassDirective{}, act);
    BasicArray<T> d_eps(eps.shape());
    double sq = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const T diff = eps[i] - ex.target_eps[i];
      sq += static_cast<double>(diff) * diff;
      d_eps[i] = T{2} * diff / denom;
    }
    losses[static_cast<std::size_t>(b)] = sq;
    if (grad) backward(weights, act, d_eps, grads[static_cast<std::size_t>(b)]);
  }

  double total = 0.0;
  for (double l : losses) total += l;

  if (grad) {
    *grad = std::move(grads[0]);
    for (int b = 1; b < n; ++b) {
      std::vector<BasicArray<T>*> dst;
      grad->for_each([&](const char*, BasicArray<T>& a) { dst.push_back(&a); });
      std::size_t i = 0;
      grads[static_cast<std::size_t>(b)].for_each(
          [&](const char*, const BasicArray<T>& a) { add_inplace(*dst[i++], a); });
    }
  }
  return static_cast<T>(total / (static_cast<double>(elems) * n));
}

template struct BasicWeights<float>;
template struct BasicWeights<double>;
template BasicWeights<double> weights_cast<double, float>(const BasicWeights<float>&);
template BasicWeights<float> weights_cast<float, double>(const BasicWeights<double>&);
template float loss_and_gradient<float>(const BasicWeights<float>&, std::span<const TrainExample<float>>,
                                        BasicWeights<float>*);
template double loss_and_gradient<double>(const BasicWeights<double>&, std::span<const TrainExample<double>>,
                                          BasicWeights<double>*);

}  // namespace rlab
