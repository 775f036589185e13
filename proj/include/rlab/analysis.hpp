#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rlab/sampler.hpp"

namespace rlab {

/// Mean over rows of the total-variation distance 0.5 * sum|a - b|. For
/// row-stochastic inputs the result lies in [0, 1].
double attention_distance(const DenseArray& a, const DenseArray& b);

/// A prompt paired with the seed of its initial noise.
struct PromptSeed {
  PromptSpec prompt;
  std::uint64_t seed = 0;
};

/// Every conditioned prompt crossed with every seed.
std::vector<PromptSeed> prompt_grid(std::span<const PromptSpec> prompts, std::span<const std::uint64_t> seeds);

struct SimilarityPoint {
  int step = 0;  // distance between the maps of `step` and `step - 1`
  double mean = 0.0;
  double std = 0.0;
};

/// Adjacent-step attention similarity, one curve per attention kind. Each
/// per-prompt value averages the conditional and unconditional passes;
/// mean and (population) std are then taken over prompts.
struct SimilarityCurve {
  std::vector<SimilarityPoint> self_attn;
  std::vector<SimilarityPoint> cross_attn;
};

SimilarityCurve similarity_curve(const ModelWeights& weights, const NoiseSchedule& schedule,
                                 const SamplerConfig& config, std::span<const PromptSeed> prompts);

struct ExponentialFit {
  double k1 = 0.0;
  double k2 = 0.0;
  double pearson_r = 0.0;
  int s_lo = 0;
  int s_hi = 0;

  double operator()(double s) const;
};

/// Least squares on (s, ln y) over points with s in [s_lo, s_hi]:
/// k2 = -slope, k1 = exp(intercept). pearson_r correlates y with the fitted
/// curve in linear space (1 when both are constant and equal). Needs at
/// least three in-window points, all with y > 0 (ErrorKind::domain).
ExponentialFit fit_exponential(std::span<const std::pair<double, double>> points, int s_lo, int s_hi);

struct PerturbationReport {
  float eta = 0.0f;
  std::vector<int> steps;                // 1..N
  std::vector<std::vector<double>> raw;  // [prompt][step - 1] raw final-image L1 deviation
  std::vector<double> mean_dev;          // per-prompt min-max scaled, then averaged
  std::vector<double> std_dev;
  std::optional<ExponentialFit> fit;
  std::string fit_error;  // why `fit` is empty, if it is
  int fit_lo = 0;
  int fit_hi = 0;

  /// Positive exponent estimate: perturbations decay with the step index.
  bool conjecture_supported() const noexcept { return fit && fit->k2 > 0.0; }
};

/// Scales each prompt's curve to [0, 1] over steps, averages across
/// prompts, and fits the mean curve on [s_lo, s_hi]. A failed fit is
/// recorded in `fit_error`, not thrown.
PerturbationReport summarize_perturbations(std::vector<std::vector<double>> raw, float eta, int s_lo, int s_hi);

/// For each step s, one run per prompt with the pre-softmax logits of all
/// four sites perturbed at s; deviation = L1 distance of the final image to
/// the unperturbed run. Default window [1, N - 2].
PerturbationReport perturbation_sweep(const ModelWeights& weights, const NoiseSchedule& schedule,
                                      const SamplerConfig& config, std::span<const PromptSeed> prompts, float eta,
                                      std::optional<std::pair<int, int>> window = std::nullopt,
                                      std::uint64_t noise_seed = 0);

}  // namespace rlab
