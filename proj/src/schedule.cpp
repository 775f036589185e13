#include "rlab/schedule.hpp"

#include "rlab/error.hpp"

namespace rlab {

NoiseSchedule make_schedule(int timesteps, double beta_start, double beta_end) {
  if (timesteps < 1 || !(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end) {
    fail(ErrorKind::domain, "invalid noise schedule parameters");
  }
  NoiseSchedule s;
  s.timesteps = timesteps;
  const auto n = static_cast<std::size_t>(timesteps) + 1;
  s.betas.assign(n, 0.0);
  s.alphas.assign(n, 1.0);
  s.alpha_bars.assign(n, 1.0);
  for (int t = 1; t <= timesteps; ++t) {
    const double frac = timesteps == 1 ? 0.0 : static_cast<double>(t - 1) / (timesteps - 1);
    const auto i = static_cast<std::size_t>(t);
    s.betas[i] = beta_start + (beta_end - beta_start) * frac;
    s.alphas[i] = 1.0 - s.betas[i];
    s.alpha_bars[i] = s.alpha_bars[i - 1] * s.alphas[i];
  }
  return s;
}

}  // namespace rlab
