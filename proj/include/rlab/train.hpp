#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rlab/model.hpp"

namespace rlab {

struct TrainConfig {
  ModelDims dims;
  int steps = 5000;
  int batch_size = 32;
  float learning_rate = 2e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float adam_epsilon = 1e-8f;
  int dataset_size = 2048;
  int validation_size = 288;
  float null_prompt_prob = 0.1f;
  std::uint64_t seed = 0;
};

struct TrainReport {
  double initial_validation_loss = 0.0;
  double final_validation_loss = 0.0;
  std::vector<double> step_losses;  // training-batch loss per step
};

struct TrainResult {
  ModelWeights weights;
  TrainReport report;
};

/// Progress hook: (step, batch loss). Called after every optimizer step.
using TrainProgress = std::function<void(int, double)>;

/// Epsilon-prediction training of the toy denoiser with Adam. Deterministic
/// per seed. Throws ErrorKind::training_divergence (with the step index) if
/// the loss stops being finite.
TrainResult train_toy(const TrainConfig& config, const TrainProgress& progress = {});

/// Loss on the fixed validation set derived from `config.seed`.
double validation_loss(const ModelWeights& weights, const TrainConfig& config);

}  // namespace rlab
