#include "rlab/train.hpp"

#include <cmath>

#include "rlab/dataset.hpp"
#include "rlab/error.hpp"
#include "rlab/rng.hpp"
#include "rlab/schedule.hpp"

namespace rlab {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kValidationStream = 3;
constexpr std::uint64_t kBatchStream = 4;

DenseArray to_model_space(const DenseArray& image) {
  DenseArray x(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) x[i] = 2.0f * image[i] - 1.0f;
  return x;
}

TrainExample<float> noised_example(const DatasetSample& s, const NoiseSchedule& schedule, SeededRng& rng,
                                   int timesteps, bool null_prompt) {
  TrainExample<float> ex;
  ex.t_index = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(timesteps)));
  ex.target_eps = gaussian(rng, s.image.shape());
  const DenseArray x0 = to_model_space(s.image);
  const double ab = schedule.alpha_bar(ex.t_index);
  const auto a = static_cast<float>(std::sqrt(ab));
  const auto b = static_cast<float>(std::sqrt(1.0 - ab));
  ex.x_t = DenseArray(x0.shape());
  for (std::size_t i = 0; i < x0.size(); ++i) ex.x_t[i] = a * x0[i] + b * ex.target_eps[i];
  ex.prompt = null_prompt ? PromptSpec::null_prompt() : s.prompt;
  return ex;
}

std::vector<TrainExample<float>> validation_set(const TrainConfig& config, const NoiseSchedule& schedule) {
  const auto data = generate_dataset(config.validation_size, derive_seed(config.seed, {kValidationStream}),
                                     config.dims.image_size);
  std::vector<TrainExample<float>> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    SeededRng rng(derive_seed(config.seed, {kValidationStream, i}));
    out.push_back(noised_example(data[i], schedule, rng, config.dims.timesteps, false));
  }
  return out;
}

struct AdamState {
  std::vector<DenseArray> m, v;
};

}  // namespace

double validation_loss(const ModelWeights& weights, const TrainConfig& config) {
  const NoiseSchedule schedule = make_schedule(config.dims.timesteps);
  const auto val = validation_set(config, schedule);
  return loss_and_gradient<float>(weights, val, nullptr);
}

TrainResult train_toy(const TrainConfig& config, const TrainProgress& progress) {
  config.dims.validate();
  if (config.steps < 0 || config.batch_size <= 0 || config.dataset_size <= 0 || config.validation_size <= 0) {
    fail(ErrorKind::config, "invalid training configuration");
  }
  const NoiseSchedule schedule = make_schedule(config.dims.timesteps);
  const auto data =
      generate_dataset(config.dataset_size, derive_seed(config.seed, {kDataStream}), config.dims.image_size);
  const auto val = validation_set(config, schedule);

  TrainResult result;
  result.weights = init_weights(config.dims, derive_seed(config.seed, {kInitStream}));
  result.report.initial_validation_loss = loss_and_gradient<float>(result.weights, val, nullptr);

  std::vector<DenseArray*> params;
  result.weights.for_each([&](const char*, DenseArray& a) { params.push_back(&a); });
  AdamState adam;
  for (DenseArray* p : params) {
    adam.m.emplace_back(p->shape());
    adam.v.emplace_back(p->shape());
  }

  ModelWeights grad;
  std::vector<TrainExample<float>> batch(static_cast<std::size_t>(config.batch_size));
  for (int step = 1; step <= config.steps; ++step) {
    SeededRng rng(derive_seed(config.seed, {kBatchStream, static_cast<std::uint64_t>(step)}));
    for (auto& ex : batch) {
      const auto& s = data[rng.below(data.size())];
      const bool null_prompt = rng.uniform() <= config.null_prompt_prob;
      ex = noised_example(s, schedule, rng, config.dims.timesteps, null_prompt);
    }
    const double loss = loss_and_gradient<float>(result.weights, batch, &grad);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::training_divergence, "training loss became non-finite at step " + std::to_string(step));
    }
    result.report.step_losses.push_back(loss);

    std::vector<const DenseArray*> grads;
    grad.for_each([&](const char*, const DenseArray& a) { grads.push_back(&a); });
    const double bc1 = 1.0 - std::pow(static_cast<double>(config.beta1), step);
    const double bc2 = 1.0 - std::pow(static_cast<double>(config.beta2), step);
    const auto lr_t = static_cast<float>(config.learning_rate * std::sqrt(bc2) / bc1);
    for (std::size_t k = 0; k < params.size(); ++k) {
      DenseArray& p = *params[k];
      DenseArray& m = adam.m[k];
      DenseArray& v = adam.v[k];
      const DenseArray& g = *grads[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = config.beta1 * m[i] + (1.0f - config.beta1) * g[i];
        v[i] = config.beta2 * v[i] + (1.0f - config.beta2) * g[i] * g[i];
        p[i] -= lr_t * m[i] / (std::sqrt(v[i]) + config.adam_epsilon);
      }
    }
    if (progress) progress(step, loss);
  }

  result.report.final_validation_loss = loss_and_gradient<float>(result.weights, val, nullptr);
  if (!std::isfinite(result.report.final_validation_loss)) {
    fail(ErrorKind::training_divergence, "validation loss is non-finite after step " + std::to_string(config.steps));
  }
  return result;
}

}  // namespace rlab
