#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "rlab/error.hpp"
#include "rlab/metrics.hpp"
#include "rlab/sampler.hpp"

using namespace rlab;

namespace {

const ModelWeights& weights() {
  static const ModelWeights w = init_weights(ModelDims{}, 21);
  return w;
}
const NoiseSchedule& schedule() {
  static const NoiseSchedule s = make_schedule();
  return s;
}

SamplerConfig cfg(int n, std::uint64_t seed = 0, Solver solver = Solver::ddim) {
  SamplerConfig c;
  c.steps = n;
  c.seed = seed;
  c.solver = solver;
  return c;
}

}  // namespace

TEST_CASE("noise schedule") {
  const auto& s = schedule();
  CHECK(s.alpha_bar(0) == 1.0);
  for (int t = 1; t <= 1000; ++t) {
    CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    CHECK(s.alpha_bar(t) > 0.0);
  }
  // Direct product oracle with betas rebuilt from the endpoints.
  double prod = 1.0;
  for (int t = 1; t <= 1000; ++t) prod *= 1.0 - (1e-4 + (0.02 - 1e-4) * (t - 1) / 999.0);
  CHECK(std::abs(s.alpha_bar(1000) - prod) < 1e-7);
  CHECK(std::abs(s.betas[1] - 1e-4) < 1e-15);
  CHECK(std::abs(s.betas[1000] - 0.02) < 1e-15);
}

TEST_CASE("timestep map") {
  const auto ts = timestep_map(20, 1000);
  REQUIRE(ts.size() == 20);
  CHECK(ts.front() == 1000);
  CHECK(ts.back() == 1);
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] < ts[i - 1]);
  CHECK(timestep_map(1, 1000) == std::vector<int>{1000});
  CHECK(timestep_map(2, 1000) == std::vector<int>{1000, 1});
  CHECK_THROWS_AS(timestep_map(0, 1000), Error);
}

TEST_CASE("ddim_step: inversion, fixed point and formula oracle") {
  const auto& s = schedule();
  const auto x0 = test::random_array(Shape{3, 4, 4}, 1, 0.4f);
  const auto eps = test::random_array(Shape{3, 4, 4}, 2);
  const int t = 600;
  const double ab = s.alpha_bar(t);
  DenseArray xt(x0.shape());
  for (std::size_t i = 0; i < xt.size(); ++i) xt[i] = static_cast<float>(std::sqrt(ab) * x0[i] + std::sqrt(1 - ab) * eps[i]);
  // Stepping to t = 0 returns x0-hat.
  CHECK(test::max_abs_diff(ddim_step(xt, eps, t, 0, s), x0) < 1e-5);
  CHECK(test::max_abs_diff(ddim_step(xt, eps, t, t, s), xt) < 1e-6);

  const auto x = test::random_array(Shape{3, 4, 4}, 3, 0.5f);
  const auto e = test::random_array(Shape{3, 4, 4}, 4, 0.5f);
  const auto out = ddim_step(x, e, 800, 500, s);
  const double a1 = s.alpha_bar(800), a2 = s.alpha_bar(500);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double raw = (x[i] - std::sqrt(1 - a1) * e[i]) / std::sqrt(a1);
    const double xh = std::clamp(raw, -1.5, 1.5);
    const double eh = (x[i] - std::sqrt(a1) * xh) / std::sqrt(1 - a1);
    CHECK(std::abs(out[i] - (std::sqrt(a2) * xh + std::sqrt(1 - a2) * eh)) < 1e-6);
  }
  CHECK_THROWS_AS(ddim_step(x, e, 100, 200, s), Error);
}

TEST_CASE("multistep2: fallback, identity and the analytic integral for linear eps") {
  const auto& s = schedule();
  const auto x = test::random_array(Shape{3, 4, 4}, 5, 0.1f);
  const auto e = test::random_array(Shape{3, 4, 4}, 6, 0.1f);
  CHECK(bitwise_equal(multistep2_step(x, e, nullptr, 0, 700, 400, s), ddim_step(x, e, 700, 400, s)));
  // x0-hat stays inside the clamp range here, so t_next == t_now is exact.
  const auto xs = test::random_array(Shape{3, 4, 4}, 9, 0.01f);
  CHECK(test::max_abs_diff(multistep2_step(xs, e, &e, 900, 700, 700, s), xs) < 1e-6);

  // eps(sigma) = a + b*sigma in sigma = sqrt(1-abar)/sqrt(abar). The exact
  // solution of d(x/sqrt(abar))/dsigma = eps is the integral of a linear
  // function, which a two-point extrapolation must reproduce.
  const auto a = test::random_array(Shape{3, 4, 4}, 7, 0.01f);
  const auto b = test::random_array(Shape{3, 4, 4}, 8, 0.01f);
  auto sigma = [&](int t) { return std::sqrt(1 - s.alpha_bar(t)) / std::sqrt(s.alpha_bar(t)); };
  const int tp = 600, tn = 400, tx = 200;
  DenseArray eps_prev(a.shape()), eps_now(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    eps_prev[i] = static_cast<float>(a[i] + b[i] * sigma(tp));
    eps_now[i] = static_cast<float>(a[i] + b[i] * sigma(tn));
  }
  const auto out = multistep2_step(x, eps_now, &eps_prev, tp, tn, tx, s);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double integral = a[i] * (sigma(tx) - sigma(tn)) + b[i] * (sigma(tx) * sigma(tx) - sigma(tn) * sigma(tn)) / 2;
    const double oracle = std::sqrt(s.alpha_bar(tx)) * (x[i] / std::sqrt(s.alpha_bar(tn)) + integral);
    CHECK(std::abs(out[i] - oracle) < 1e-6);
  }
}

TEST_CASE("sampling is deterministic and the all-ones strategy equals the reference bitwise") {
  const auto prompt = PromptSpec::parse("square-blue");
  for (Solver solver : {Solver::ddim, Solver::multistep2}) {
    const auto c = cfg(8, 4, solver);
    const auto ref = sample_reference(weights(), schedule(), c, prompt);
    const auto ref2 = sample_reference(weights(), schedule(), c, prompt);
    CHECK(bitwise_equal(ref.image, ref2.image));
    const auto ones = StrategyVector::all_ones(8);
    const auto run = sample(weights(), schedule(), c, prompt, &ones);
    CHECK(bitwise_equal(run.image, ref.image));
    CHECK(psnr(run.image, ref.image) == kPsnrCapDb);
    CHECK(ref.trajectory.size() == 9);
    CHECK(ref.observations.size() == 32);
    for (float v : ref.image.span()) CHECK((v >= 0.0f && v <= 1.0f));
  }
}

TEST_CASE("provenance of the worked example strategy") {
  const auto pi = StrategyVector::parse("[1,1,0,0,1,0]");
  const auto run = sample(weights(), schedule(), cfg(6), PromptSpec::parse("cross-red"), &pi);
  std::map<int, int> provenance;
  for (const auto& obs : run.observations) {
    if (obs.source == MapSource::reused) {
      const auto [it, fresh] = provenance.emplace(obs.step, obs.provenance_step);
      CHECK(it->second == obs.provenance_step);
    }
  }
  CHECK(provenance == std::map<int, int>{{3, 2}, {4, 2}, {6, 5}});
}

TEST_CASE("property: reused observations are bit-identical to the last computed payload") {
  for (ReuseTarget target : {ReuseTarget::attention_maps, ReuseTarget::features}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      SeededRng rng(seed + 50);
      std::vector<std::uint8_t> bits(7, 1);
      for (std::size_t i = 1; i < bits.size(); ++i) bits[i] = rng.below(2) ? 1 : 0;
      const StrategyVector pi(bits);
      SampleOptions opts;
      opts.reuse.target = target;
      const auto run = sample(weights(), schedule(), cfg(7, seed), PromptSpec::parse("circle-green"), &pi, opts);
      std::array<const AttentionObservation*, 4> last{};
      for (const auto& obs : run.observations) {
        auto& slot = last[static_cast<std::size_t>(obs.site.index())];
        if (obs.source == MapSource::computed) {
          slot = &obs;
        } else {
          REQUIRE(slot != nullptr);
          CHECK(obs.provenance_step == slot->step);
          if (target == ReuseTarget::attention_maps) {
            CHECK(bitwise_equal(obs.map, slot->map));
          } else {
            CHECK(bitwise_equal(obs.feature, slot->feature));
          }
        }
      }
    }
  }
}

TEST_CASE("cost tally counts") {
  const auto h = hurry(20, 10);
  SampleOptions opts;
  opts.record_observations = false;
  const auto run = sample(weights(), schedule(), cfg(20), PromptSpec::parse("circle-red"), &h, opts);
  CHECK(run.cost.full_steps == 10);
  CHECK(run.cost.reuse_steps == 10);
  CHECK(run.cost.estimated_ms == 3980.0);
  CHECK(run.cost.cache_bytes == 33792);
  CHECK(run.cost.full_steps + run.cost.reuse_steps == 20);
}

TEST_CASE("strategy errors") {
  const auto short_pi = StrategyVector::parse("110");
  try {
    sample(weights(), schedule(), cfg(6), PromptSpec{}, &short_pi);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_strategy);
  }
  CHECK_THROWS_AS(StrategyVector::parse("0110"), Error);
}

TEST_CASE("initial noise is shared across prompts, distinct across seeds") {
  CHECK(bitwise_equal(initial_noise(ModelDims{}, 3), initial_noise(ModelDims{}, 3)));
  CHECK_FALSE(initial_noise(ModelDims{}, 3) == initial_noise(ModelDims{}, 4));
}
