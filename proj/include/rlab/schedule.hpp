#pragma once

#include <vector>

namespace rlab {

/// Discrete DDPM schedule: betas linear in t over [1, T]; alpha_bar(0) = 1.
struct NoiseSchedule {
  int timesteps = 1000;
  std::vector<double> betas;       // index t in [0, T]; betas[0] unused (0)
  std::vector<double> alphas;      // 1 - betas
  std::vector<double> alpha_bars;  // cumulative products, alpha_bars[0] = 1

  double alpha_bar(int t) const { return alpha_bars.at(static_cast<std::size_t>(t)); }
};

NoiseSchedule make_schedule(int timesteps = 1000, double beta_start = 1e-4, double beta_end = 0.02);

}  // namespace rlab
