#include "rlab/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "rlab/error.hpp"
#include "rlab/rng.hpp"

namespace rlab {

double attention_distance(const DenseArray& a, const DenseArray& b) {
  if (!(a.shape() == b.shape()) || a.shape().rank() != 2) {
    fail(ErrorKind::dimension, "attention_distance: shapes differ " + a.shape().str() + " vs " + b.shape().str());
  }
  double total = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < a.cols(); ++j) row += std::fabs(static_cast<double>(a.at(i, j)) - b.at(i, j));
    total += 0.5 * row;
  }
  return total / a.rows();
}

std::vector<PromptSeed> prompt_grid(std::span<const PromptSpec> prompts, std::span<const std::uint64_t> seeds) {
  std::vector<PromptSeed> out;
  for (std::uint64_t seed : seeds) {
    for (const PromptSpec& p : prompts) out.push_back({p, seed});
  }
  return out;
}

namespace {

std::pair<double, double> mean_std(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

SamplerConfig with_seed(SamplerConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

}  // namespace

SimilarityCurve similarity_curve(const ModelWeights& weights, const NoiseSchedule& schedule,
                                 const SamplerConfig& config, std::span<const PromptSeed> prompts) {
  if (config.steps < 2) fail(ErrorKind::config, "similarity curve needs N >= 2");
  if (prompts.empty()) fail(ErrorKind::config, "similarity curve needs at least one prompt");
  const int n = config.steps;
  const int np = static_cast<int>(prompts.size());
  // [prompt][kind][step - 2]
  std::vector<std::array<std::vector<double>, 2>> dist(static_cast<std::size_t>(np));

  SampleOptions options;
  options.record_trajectory = false;
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < np; ++p) {
    const PromptSeed& ps = prompts[static_cast<std::size_t>(p)];
    const SampleResult run = sample_reference(weights, schedule, with_seed(config, ps.seed), ps.prompt, options);
    auto obs_at = [&](int step, int site) -> const DenseArray& {
      return run.observations[static_cast<std::size_t>((step - 1) * AttentionSite::kCount + site)].map;
    };
    for (int kind = 0; kind < 2; ++kind) {
      auto& out = dist[static_cast<std::size_t>(p)][static_cast<std::size_t>(kind)];
      for (int s = 2; s <= n; ++s) {
        double d = 0.0;
        for (PassId pass : {PassId::conditional, PassId::unconditional}) {
          const int site = AttentionSite{static_cast<LayerId>(kind), pass}.index();
          d += attention_distance(obs_at(s, site), obs_at(s - 1, site));
        }
        out.push_back(d / 2.0);
      }
    }
  }

  SimilarityCurve curve;
  for (int kind = 0; kind < 2; ++kind) {
    auto& dst = kind == 0 ? curve.self_attn : curve.cross_attn;
    for (int s = 2; s <= n; ++s) {
      std::vector<double> vals;
      for (int p = 0; p < np; ++p) {
        vals.push_back(dist[static_cast<std::size_t>(p)][static_cast<std::size_t>(kind)][static_cast<std::size_t>(s - 2)]);
      }
      const auto [mean, sd] = mean_std(vals);
      dst.push_back({s, mean, sd});
    }
  }
  return curve;
}

double ExponentialFit::operator()(double s) const { return k1 * std::exp(-k2 * s); }

ExponentialFit fit_exponential(std::span<const std::pair<double, double>> points, int s_lo, int s_hi) {
  std::vector<std::pair<double, double>> in;
  for (const auto& [s, y] : points) {
    if (s < s_lo || s > s_hi) continue;
    if (!(y > 0.0)) {
      fail(ErrorKind::domain, "exponential fit needs y > 0 (step " + std::to_string(s) + " has " +
                                  std::to_string(y) + ")");
    }
    in.emplace_back(s, y);
  }
  if (in.size() < 3) fail(ErrorKind::domain, "exponential fit needs at least 3 points in the window");

  const double n = static_cast<double>(in.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [s, y] : in) {
    sx += s;
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [s, y] : in) {
    sxx += (s - mx) * (s - mx);
    sxy += (s - mx) * (std::log(y) - my);
  }
  if (sxx == 0.0) fail(ErrorKind::domain, "exponential fit needs at least two distinct steps");
  const double slope = sxy / sxx;

  ExponentialFit fit;
  fit.k2 = -slope;
  fit.k1 = std::exp(my - slope * mx);
  fit.s_lo = s_lo;
  fit.s_hi = s_hi;

  double my_lin = 0.0, mf = 0.0;
  std::vector<double> fitted;
  for (const auto& [s, y] : in) {
    fitted.push_back(fit(s));
    my_lin += y;
    mf += fitted.back();
  }
  my_lin /= n;
  mf /= n;
  double cov = 0.0, vy = 0.0, vf = 0.0, resid = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double dy = in[i].second - my_lin, df = fitted[i] - mf;
    cov += dy * df;
    vy += dy * dy;
    vf += df * df;
    resid += std::fabs(in[i].second - fitted[i]);
  }
  const double scale = std::max(std::fabs(my_lin), 1e-300);
  const double tiny = 1e-24 * scale * scale * n;
  if (vy <= tiny || vf <= tiny) {
    fit.pearson_r = resid <= 1e-12 * scale * n ? 1.0 : 0.0;
  } else {
    fit.pearson_r = std::clamp(cov / std::sqrt(vy * vf), -1.0, 1.0);
  }
  return fit;
}

PerturbationReport summarize_perturbations(std::vector<std::vector<double>> raw, float eta, int s_lo, int s_hi) {
  if (raw.empty() || raw.front().empty()) fail(ErrorKind::domain, "no perturbation data");
  const std::size_t n = raw.front().size();
  PerturbationReport report;
  report.eta = eta;
  report.fit_lo = s_lo;
  report.fit_hi = s_hi;
  for (std::size_t s = 1; s <= n; ++s) report.steps.push_back(static_cast<int>(s));

  std::vector<std::vector<double>> scaled;
  for (const auto& curve : raw) {
    if (curve.size() != n) fail(ErrorKind::dimension, "ragged perturbation data");
    const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end());
    std::vector<double> sc(n, 0.0);
    if (*hi > *lo) {
      for (std::size_t i = 0; i < n; ++i) sc[i] = (curve[i] - *lo) / (*hi - *lo);
    }
    scaled.push_back(std::move(sc));
  }
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> col;
    for (const auto& sc : scaled) col.push_back(sc[i]);
    const auto [mean, sd] = mean_std(col);
    report.mean_dev.push_back(mean);
    report.std_dev.push_back(sd);
    points.emplace_back(static_cast<double>(i + 1), mean);
  }
  report.raw = std::move(raw);
  try {
    report.fit = fit_exponential(points, s_lo, s_hi);
  } catch (const Error& e) {
    report.fit_error = e.what();
  }
  return report;
}

PerturbationReport perturbation_sweep(const ModelWeights& weights, const NoiseSchedule& schedule,
                                      const SamplerConfig& config, std::span<const PromptSeed> prompts, float eta,
                                      std::optional<std::pair<int, int>> window, std::uint64_t noise_seed) {
  if (!(eta > 0.0f)) fail(ErrorKind::config, "perturbation scale eta must be > 0");
  if (prompts.empty()) fail(ErrorKind::config, "perturbation sweep needs at least one prompt");
  const int n = config.steps;
  const auto [s_lo, s_hi] = window.value_or(std::pair<int, int>{1, n - 2});
  const int np = static_cast<int>(prompts.size());

  SampleOptions quiet;
  quiet.record_observations = false;
  quiet.record_trajectory = false;

  std::vector<DenseArray> refs(static_cast<std::size_t>(np));
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < np; ++p) {
    const PromptSeed& ps = prompts[static_cast<std::size_t>(p)];
    refs[static_cast<std::size_t>(p)] =
        sample_reference(weights, schedule, with_seed(config, ps.seed), ps.prompt, quiet).image;
  }

  std::vector<std::vector<double>> raw(static_cast<std::size_t>(np), std::vector<double>(static_cast<std::size_t>(n)));
  const int tasks = np * n;
#pragma omp parallel for schedule(dynamic)
  for (int task = 0; task < tasks; ++task) {
    const int p = task / n, s = task % n + 1;
    const PromptSeed& ps = prompts[static_cast<std::size_t>(p)];
    SampleOptions opts = quiet;
    opts.perturbation = PerturbationPlan{s, eta, derive_seed(noise_seed, {ps.seed, static_cast<std::uint64_t>(p)})};
    const SampleResult run = sample(weights, schedule, with_seed(config, ps.seed), ps.prompt, nullptr, opts);
    raw[static_cast<std::size_t>(p)][static_cast<std::size_t>(s - 1)] =
        l1_image_distance(run.image, refs[static_cast<std::size_t>(p)]);
  }
  return summarize_perturbations(std::move(raw), eta, s_lo, s_hi);
}

}  // namespace rlab
