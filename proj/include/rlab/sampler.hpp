#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rlab/cache.hpp"
#include "rlab/metrics.hpp"
#include "rlab/model.hpp"
#include "rlab/schedule.hpp"
#include "rlab/strategy.hpp"

namespace rlab {

enum class Solver : std::uint8_t { ddim, multistep2 };

const char* to_string(Solver s) noexcept;
Solver parse_solver(std::string_view s);

/// x0 estimates are clamped to [-kX0Clamp, kX0Clamp] before each update.
inline constexpr float kX0Clamp = 1.5f;

struct SamplerConfig {
  Solver solver = Solver::ddim;
  int steps = 20;
  float guidance_scale = 3.0f;
  std::uint64_t seed = 0;
};

/// Training timesteps visited by an N-step sampler: uniform stride from T
/// down to 1 (t_1 = T, t_N = 1), strictly decreasing.
std::vector<int> timestep_map(int steps, int timesteps);

/// Deterministic DDIM update from t_now to t_next (t_next = 0 means the
/// clean sample, alpha_bar = 1). When the x0 estimate is clamped, eps is
/// re-derived from the clamped estimate before the update.
DenseArray ddim_step(const DenseArray& x, const DenseArray& eps, int t_now, int t_next,
                     const NoiseSchedule& schedule);

/// Second-order multistep: the DDIM update driven by the linear
/// extrapolation of eps in sigma = sqrt(1 - abar) / sqrt(abar), i.e. the
/// variable-step two-point Adams-Bashforth rule. Without history
/// (`eps_prev == nullptr`) this is exactly `ddim_step`.
DenseArray multistep2_step(const DenseArray& x, const DenseArray& eps, const DenseArray* eps_prev, int t_prev,
                           int t_now, int t_next, const NoiseSchedule& schedule);

/// Logit noise injected at every attention site of one sampling step.
struct PerturbationPlan {
  int step = 1;
  float eta = 0.1f;
  std::uint64_t seed = 0;
};

struct SampleOptions {
  ReuseConfig reuse;
  CostModel cost;
  bool record_observations = true;
  bool record_trajectory = true;
  std::optional<PerturbationPlan> perturbation;
};

struct SampleResult {
  DenseArray image;                    // [3 x 16 x 16] in [0, 1]
  std::vector<DenseArray> trajectory;  // N + 1 states, noise first
  std::vector<AttentionObservation> observations;  // 4 per step, step-major
  CostTally cost;
};

/// Initial noise for a seed; shared by every prompt and strategy so that
/// runs are comparable against the reference.
DenseArray initial_noise(const ModelDims& dims, std::uint64_t seed);

/// Guided reverse diffusion. With a strategy, step s computes (and caches)
/// the attention payloads when bit s is 1 and substitutes the cached ones
/// when it is 0. Without a strategy every step computes and nothing is
/// cached (the reference sampler).
SampleResult sample(const ModelWeights& weights, const NoiseSchedule& schedule, const SamplerConfig& config,
                    const PromptSpec& prompt, const StrategyVector* strategy, const SampleOptions& options = {});

inline SampleResult sample_reference(const ModelWeights& weights, const NoiseSchedule& schedule,
                                     const SamplerConfig& config, const PromptSpec& prompt,
                                     const SampleOptions& options = {}) {
  return sample(weights, schedule, config, prompt, nullptr, options);
}

/// Model-space [-1, 1] to image-space [0, 1], clamped.
DenseArray to_image(const DenseArray& x);

}  // namespace rlab
