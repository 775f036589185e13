#include "rlab/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "rlab/error.hpp"
#include "rlab/rng.hpp"

namespace rlab {

const char* to_string(Solver s) noexcept { return s == Solver::ddim ? "ddim" : "multistep2"; }

Solver parse_solver(std::string_view s) {
  if (s == "ddim") return Solver::ddim;
  if (s == "multistep2") return Solver::multistep2;
  fail(ErrorKind::config, "solver must be ddim or multistep2 (got '" + std::string(s) + "')");
}

std::vector<int> timestep_map(int steps, int timesteps) {
  if (steps < 1 || steps > timesteps) {
    fail(ErrorKind::config, "step count must be in [1, " + std::to_string(timesteps) + "]");
  }
  std::vector<int> ts(static_cast<std::size_t>(steps));
  if (steps == 1) {
    ts[0] = timesteps;
    return ts;
  }
  for (int s = 1; s <= steps; ++s) {
    const double frac = static_cast<double>(steps - s) / (steps - 1);
    ts[static_cast<std::size_t>(s - 1)] = 1 + static_cast<int>(std::lround(frac * (timesteps - 1)));
  }
  return ts;
}

DenseArray ddim_step(const DenseArray& x, const DenseArray& eps, int t_now, int t_next,
                     const NoiseSchedule& schedule) {
  if (!(x.shape() == eps.shape())) fail(ErrorKind::dimension, "ddim_step: x and eps shapes differ");
  if (t_next > t_now || t_next < 0) fail(ErrorKind::domain, "ddim_step needs t_now >= t_next >= 0");
  const double ab = schedule.alpha_bar(t_now);
  const double ab_next = schedule.alpha_bar(t_next);
  const double sa = std::sqrt(ab), sb = std::sqrt(1.0 - ab);
  const double sa_next = std::sqrt(ab_next), sb_next = std::sqrt(1.0 - ab_next);
  DenseArray out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double raw = (static_cast<double>(x[i]) - sb * eps[i]) / sa;
    const double x0 = std::clamp(raw, -static_cast<double>(kX0Clamp), static_cast<double>(kX0Clamp));
    // Keep eps consistent with the clamped estimate; otherwise a clamped
    // step degenerates to x_next ~ eps and the model's gain compounds.
    const double e = x0 == raw ? static_cast<double>(eps[i]) : (x[i] - sa * x0) / sb;
    out[i] = static_cast<float>(sa_next * x0 + sb_next * e);
  }
  return out;
}

namespace {

double sigma_of(const NoiseSchedule& schedule, int t) {
  const double ab = schedule.alpha_bar(t);
  return std::sqrt(1.0 - ab) / std::sqrt(ab);
}

}  // namespace

DenseArray multistep2_step(const DenseArray& x, const DenseArray& eps, const DenseArray* eps_prev, int t_prev,
                           int t_now, int t_next, const NoiseSchedule& schedule) {
  if (eps_prev == nullptr || t_prev == t_now) return ddim_step(x, eps, t_now, t_next, schedule);
  if (!(eps_prev->shape() == eps.shape())) fail(ErrorKind::dimension, "multistep2_step: history shape differs");
  const double h = sigma_of(schedule, t_next) - sigma_of(schedule, t_now);
  const double h_prev = sigma_of(schedule, t_now) - sigma_of(schedule, t_prev);
  const double c = h / (2.0 * h_prev);
  DenseArray extrapolated(eps.shape());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    extrapolated[i] = static_cast<float>(eps[i] + c * (static_cast<double>(eps[i]) - (*eps_prev)[i]));
  }
  return ddim_step(x, extrapolated, t_now, t_next, schedule);
}

DenseArray initial_noise(const ModelDims& dims, std::uint64_t seed) {
  SeededRng rng(derive_seed(seed, {0x4E015Eull}));
  return gaussian(rng, dims.image_shape());
}

DenseArray to_image(const DenseArray& x) {
  DenseArray out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(0.5f * (x[i] + 1.0f), 0.0f, 1.0f);
  return out;
}

SampleResult sample(const ModelWeights& weights, const NoiseSchedule& schedule, const SamplerConfig& config,
                    const PromptSpec& prompt, const StrategyVector* strategy, const SampleOptions& options) {
  if (schedule.timesteps != weights.dims.timesteps) {
    fail(ErrorKind::config, "noise schedule and model disagree on the number of timesteps");
  }
  if (strategy && strategy->size() != config.steps) {
    fail(ErrorKind::invalid_strategy, "strategy length " + std::to_string(strategy->size()) +
                                          " does not match N = " + std::to_string(config.steps));
  }
  const std::vector<int> ts = timestep_map(config.steps, schedule.timesteps);
  const auto& perturb = options.perturbation;
  if (perturb && (perturb->step < 1 || perturb->step > config.steps)) {
    fail(ErrorKind::config, "perturbation step outside [1, N]");
  }

  SampleResult result;
  DenseArray x = initial_noise(weights.dims, config.seed);
  if (options.record_trajectory) result.trajectory.push_back(x);

  AttentionCache cache(weights.dims, options.reuse.target);
  std::array<DenseArray, AttentionSite::kCount> fetched;
  DenseArray eps_prev;
  int t_prev = 0;

  for (int s = 1; s <= config.steps; ++s) {
    const int t_now = ts[static_cast<std::size_t>(s - 1)];
    const int t_next = s < config.steps ? ts[static_cast<std::size_t>(s)] : 0;
    const bool compute = strategy == nullptr || strategy->computes_at(s);

    std::array<SiteDirective, AttentionSite::kCount> dirs{};
    for (int i = 0; i < AttentionSite::kCount; ++i) {
      const AttentionSite site = AttentionSite::from_index(i);
      auto& d = dirs[static_cast<std::size_t>(i)];
      if (!compute) {
        fetched[static_cast<std::size_t>(i)] = cache.fetch(site);
        d = SiteDirective::reuse(options.reuse.target, &fetched[static_cast<std::size_t>(i)],
                                 *cache.provenance(site));
      } else if (perturb && perturb->step == s) {
        d = SiteDirective::perturb(perturb->eta, derive_seed(perturb->seed, {static_cast<std::uint64_t>(s),
                                                                             static_cast<std::uint64_t>(i)}));
      }
    }
    const auto dir_at = [&](LayerId layer, PassId pass) {
      return dirs[static_cast<std::size_t>(AttentionSite{layer, pass}.index())];
    };
    const PassDirective cond{dir_at(LayerId::self_attn, PassId::conditional),
                             dir_at(LayerId::cross_attn, PassId::conditional)};
    const PassDirective uncond{dir_at(LayerId::self_attn, PassId::unconditional),
                               dir_at(LayerId::cross_attn, PassId::unconditional)};

    GuidedPrediction pred = cfg_predict(weights, x, t_now, prompt, config.guidance_scale, cond, uncond, s);

    if (compute) {
      ++result.cost.full_steps;
      if (strategy) {
        for (const auto& obs : pred.observations) {
          const DenseArray& payload = options.reuse.target == ReuseTarget::features ? obs.feature : obs.map;
          cache.store(obs.site, payload, s, options.reuse.precision);
        }
      }
    } else {
      ++result.cost.reuse_steps;
    }

    if (config.solver == Solver::multistep2) {
      x = multistep2_step(x, pred.eps, s > 1 ? &eps_prev : nullptr, t_prev, t_now, t_next, schedule);
      eps_prev = pred.eps;
      t_prev = t_now;
    } else {
      x = ddim_step(x, pred.eps, t_now, t_next, schedule);
    }
    if (!x.all_finite()) fail(ErrorKind::numeric, "non-finite sampler state at step " + std::to_string(s));
    if (options.record_trajectory) result.trajectory.push_back(x);
    if (options.record_observations) {
      for (auto& obs : pred.observations) result.observations.push_back(std::move(obs));
    }
  }

  result.image = to_image(x);
  const StrategyVector effective = strategy ? *strategy : StrategyVector::all_ones(config.steps);
  result.cost.estimated_ms = latency_estimate(effective, options.cost);
  result.cost.cache_bytes =
      (strategy && strategy->reuse_count() > 0) ? cache_memory_bytes(options.reuse, weights.dims) : 0;
  return result;
}

}  // namespace rlab
