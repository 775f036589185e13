#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "rlab/checkpoint.hpp"
#include "rlab/dataset.hpp"
#include "rlab/error.hpp"
#include "rlab/model.hpp"
#include "rlab/train.hpp"

using namespace rlab;

namespace {

const ModelWeights& toy_weights() {
  static const ModelWeights w = init_weights(ModelDims{}, 11);
  return w;
}

DenseArray toy_input(std::uint64_t seed) { return test::random_array(ModelDims{}.image_shape(), seed); }

bool rows_stochastic(const DenseArray& m) {
  for (int r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < m.cols(); ++c) {
      if (m.at(r, c) < 0.0f) return false;
      sum += m.at(r, c);
    }
    if (std::abs(sum - 1.0) > 1e-6) return false;
  }
  return true;
}

template <typename T>
std::vector<TrainExample<T>> grad_batch(const ModelDims& dims, std::uint64_t seed) {
  std::vector<TrainExample<T>> batch;
  const PromptSpec prompts[] = {PromptSpec::parse("square-green"), PromptSpec::null_prompt(),
                                PromptSpec::parse("cross-blue")};
  for (int i = 0; i < 3; ++i) {
    TrainExample<T> ex;
    ex.x_t = array_cast<T>(test::random_array(dims.image_shape(), seed + 10 * i));
    ex.target_eps = array_cast<T>(test::random_array(dims.image_shape(), seed + 10 * i + 1));
    ex.t_index = 1 + (3 * i + 2) % dims.timesteps;
    ex.prompt = prompts[i];
    batch.push_back(std::move(ex));
  }
  return batch;
}

// Central differences in double; returns the worst relative error seen.
// Entries whose gradient is below `floor` in magnitude compare absolutely
// against the floor.
double gradient_check(const BasicWeights<double>& w0, const std::vector<TrainExample<double>>& batch,
                      std::size_t stride, double floor) {
  BasicWeights<double> grad = BasicWeights<double>::zeros(w0.dims);
  loss_and_gradient<double>(w0, batch, &grad);
  std::vector<BasicArray<double>*> params, grads;
  BasicWeights<double> w = w0;
  w.for_each([&](const char*, BasicArray<double>& t) { params.push_back(&t); });
  grad.for_each([&](const char*, BasicArray<double>& t) { grads.push_back(&t); });
  const double h = 1e-3;
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p]->size(); i += stride) {
      const double saved = (*params[p])[i];
      (*params[p])[i] = saved + h;
      const double up = loss_and_gradient<double>(w, batch, nullptr);
      (*params[p])[i] = saved - h;
      const double down = loss_and_gradient<double>(w, batch, nullptr);
      (*params[p])[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = (*grads[p])[i];
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), floor});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("prompt vocabulary") {
  const auto all = PromptSpec::all();
  std::set<int> classes;
  for (const auto& p : all) {
    classes.insert(p.class_index());
    CHECK(PromptSpec::parse(p.name()) == p);
  }
  CHECK(classes.size() == 9);
  CHECK(PromptSpec::parse("null").is_null);
  CHECK_THROWS_AS(PromptSpec::parse("triangle-red"), Error);
}

TEST_CASE("predict_noise is deterministic and exposes row-stochastic maps") {
  const auto x = toy_input(1);
  const auto prompt = PromptSpec::parse("circle-blue");
  const auto a = predict_noise(toy_weights(), x, 500, prompt);
  const auto b = predict_noise(toy_weights(), x, 500, prompt);
  CHECK(bitwise_equal(a.eps, b.eps));
  REQUIRE(a.observations.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(bitwise_equal(a.observations[i].map, b.observations[i].map));
    CHECK(rows_stochastic(a.observations[i].map));
    CHECK(a.observations[i].map.rows() == 64);
  }
  CHECK(a.observations[0].site.layer == LayerId::self_attn);
  CHECK(a.observations[0].map.cols() == 64);
  CHECK(a.observations[1].map.cols() == 2);
  CHECK(a.observations[0].feature.shape() == Shape{64, 32});
}

TEST_CASE("reusing exactly the computed maps or features is a bitwise no-op") {
  const auto x = toy_input(2);
  const auto prompt = PromptSpec::parse("square-red");
  const auto ref = predict_noise(toy_weights(), x, 300, prompt);
  const PassDirective maps{SiteDirective::reuse(ReuseTarget::attention_maps, &ref.observations[0].map, 1),
                           SiteDirective::reuse(ReuseTarget::attention_maps, &ref.observations[1].map, 1)};
  const auto via_maps = predict_noise(toy_weights(), x, 300, prompt, maps);
  CHECK(bitwise_equal(via_maps.eps, ref.eps));
  CHECK(via_maps.observations[0].source == MapSource::reused);
  CHECK(via_maps.observations[0].provenance_step == 1);

  const PassDirective feats{SiteDirective::reuse(ReuseTarget::features, &ref.observations[0].feature, 1),
                            SiteDirective::reuse(ReuseTarget::features, &ref.observations[1].feature, 1)};
  const auto via_feats = predict_noise(toy_weights(), x, 300, prompt, feats);
  CHECK(bitwise_equal(via_feats.eps, ref.eps));
  CHECK(via_feats.observations[0].map.empty());
}

TEST_CASE("zero-scale logit perturbation is a no-op, nonzero changes the output") {
  const auto x = toy_input(3);
  const auto prompt = PromptSpec::parse("cross-green");
  const auto ref = predict_noise(toy_weights(), x, 700, prompt);
  const PassDirective zero{SiteDirective::perturb(0.0f, 5), SiteDirective::perturb(0.0f, 6)};
  CHECK(bitwise_equal(predict_noise(toy_weights(), x, 700, prompt, zero).eps, ref.eps));
  const PassDirective some{SiteDirective::perturb(0.5f, 5), SiteDirective::perturb(0.5f, 6)};
  const auto pert = predict_noise(toy_weights(), x, 700, prompt, some);
  CHECK_FALSE(pert.eps == ref.eps);
  CHECK(pert.observations[0].source == MapSource::perturbed);
  CHECK(rows_stochastic(pert.observations[0].map));
}

TEST_CASE("directive errors") {
  const auto x = toy_input(4);
  const PassDirective empty{SiteDirective::reuse(ReuseTarget::attention_maps, nullptr, 1), {}};
  try {
    predict_noise(toy_weights(), x, 10, PromptSpec{}, empty);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::reuse_violation);
  }
  CHECK_THROWS_AS(predict_noise(toy_weights(), x, 0, PromptSpec{}), Error);
  CHECK_THROWS_AS(predict_noise(toy_weights(), x, 1001, PromptSpec{}), Error);
  DenseArray wrong(Shape{3, 8, 8});
  CHECK_THROWS_AS(predict_noise(toy_weights(), wrong, 10, PromptSpec{}), Error);
  ModelWeights broken = toy_weights();
  broken.patch_out_bias[0] = std::nanf("");
  try {
    predict_noise(broken, x, 10, PromptSpec{});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
  }
}

TEST_CASE("cfg_predict formula") {
  const auto x = toy_input(5);
  const auto prompt = PromptSpec::parse("circle-green");
  const auto w0 = cfg_predict(toy_weights(), x, 400, prompt, 0.0f);
  CHECK(bitwise_equal(w0.eps, w0.eps_uncond));
  const auto w1 = cfg_predict(toy_weights(), x, 400, prompt, 1.0f);
  CHECK(bitwise_equal(w1.eps, w1.eps_cond));

  const auto cond = predict_noise(toy_weights(), x, 400, prompt).eps;
  const auto uncond = predict_noise(toy_weights(), x, 400, PromptSpec::null_prompt()).eps;
  const auto g = cfg_predict(toy_weights(), x, 400, prompt, 7.5f);
  for (std::size_t i = 0; i < g.eps.size(); ++i) {
    const double oracle = uncond[i] + 7.5 * (static_cast<double>(cond[i]) - uncond[i]);
    CHECK(std::abs(g.eps[i] - oracle) <= 1e-5 * (1.0 + std::abs(oracle)));
  }
  REQUIRE(g.observations.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(g.observations[static_cast<std::size_t>(i)].site.index() == i);

  // Affine in w: e(2) - e(1) == e(1) - e(0).
  const auto w2 = cfg_predict(toy_weights(), x, 400, prompt, 2.0f);
  for (std::size_t i = 0; i < g.eps.size(); ++i) {
    CHECK(std::abs((w2.eps[i] - w1.eps[i]) - (w1.eps[i] - w0.eps[i])) <= 1e-5);
  }
  CHECK_THROWS_AS(cfg_predict(toy_weights(), x, 400, prompt, -1.0f), Error);
}

TEST_CASE("gradient check: every parameter of a miniature model") {
  ModelDims tiny;
  tiny.image_size = 4;
  tiny.width = 8;
  tiny.ffn_hidden = 16;
  tiny.timesteps = 10;
  const auto w = weights_cast<double>(init_weights(tiny, 3));
  const auto batch = grad_batch<double>(tiny, 77);
  const double worst = gradient_check(w, batch, 1, 1e-6);
  INFO("worst relative error " << worst);
  CHECK(worst <= 1e-2);
}

TEST_CASE("gradient check: sampled parameters of the full-size model") {
  const auto w = weights_cast<double>(init_weights(ModelDims{}, 4));
  const auto batch = grad_batch<double>(ModelDims{}, 91);
  const double worst = gradient_check(w, batch, 97, 1e-6);
  INFO("worst relative error " << worst);
  CHECK(worst <= 1e-2);
}

TEST_CASE("dataset: balance, range and the red-disc pixel oracle") {
  const auto nine = generate_dataset(9, 0);
  std::set<int> classes;
  for (const auto& s : nine) classes.insert(s.prompt.class_index());
  CHECK(classes.size() == 9);

  for (const auto& s : generate_dataset(90, 5)) {
    for (float v : s.image.span()) CHECK((v >= 0.0f && v <= 1.0f));
  }

  for (const auto& s : generate_dataset(45, 2)) {
    if (!(s.prompt == PromptSpec::parse("circle-red"))) continue;
    // Independent renderer check: red mass on pixel centres inside the disc
    // vs the same number of pixels outside it.
    double inside = 0.0, outside = 0.0;
    int n_in = 0, n_out = 0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const double dx = x + 0.5 - s.geometry.cx, dy = y + 0.5 - s.geometry.cy;
        const double red = s.image[static_cast<std::size_t>(y * 16 + x)];
        if (std::sqrt(dx * dx + dy * dy) <= s.geometry.extent) {
          inside += red;
          ++n_in;
        } else {
          outside += red;
          ++n_out;
        }
      }
    REQUIRE(n_in > 0);
    CHECK(inside / n_in >= 2.0 * (outside / n_out));
    CHECK(inside >= 2.0 * (outside * n_in / n_out));
  }
}

TEST_CASE("training: zero steps returns the initialization; runs are deterministic") {
  TrainConfig cfg;
  cfg.steps = 0;
  cfg.dataset_size = 18;
  cfg.validation_size = 9;
  cfg.batch_size = 4;
  cfg.seed = 3;
  const auto zero = train_toy(cfg);
  const auto again = train_toy(cfg);
  bool same = true;
  zero.weights.for_each([&](const char* name, const DenseArray& t) {
    again.weights.for_each([&](const char* other, const DenseArray& u) {
      if (std::string(name) == other) same = same && bitwise_equal(t, u);
    });
  });
  CHECK(same);
  CHECK(zero.report.initial_validation_loss == zero.report.final_validation_loss);

  cfg.steps = 3;
  const auto a = train_toy(cfg), b = train_toy(cfg);
  CHECK(bitwise_equal(a.weights.self_q, b.weights.self_q));
  CHECK(bitwise_equal(a.weights.patch_out, b.weights.patch_out));
  CHECK(a.report.step_losses == b.report.step_losses);
  CHECK_FALSE(bitwise_equal(a.weights.self_q, zero.weights.self_q));
}

TEST_CASE("training divergence is reported with its kind") {
  TrainConfig cfg;
  cfg.steps = 5;
  cfg.dataset_size = 18;
  cfg.validation_size = 9;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e30f;
  try {
    train_toy(cfg);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::training_divergence || e.kind() == ErrorKind::numeric));
  }
}

TEST_CASE("checkpoint round trip and failure kinds") {
  const auto dir = test::scratch_dir("ckpt");
  const auto path = dir / "w.ckpt";
  save_checkpoint(path, toy_weights());
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.dims == toy_weights().dims);
  bool same = true;
  std::vector<const DenseArray*> a, b;
  toy_weights().for_each([&](const char*, const DenseArray& t) { a.push_back(&t); });
  loaded.for_each([&](const char*, const DenseArray& t) { b.push_back(&t); });
  for (std::size_t i = 0; i < a.size(); ++i) same = same && bitwise_equal(*a[i], *b[i]);
  CHECK(same);

  try {
    load_checkpoint(dir / "absent.ckpt");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_artifact);
  }
  {
    std::ofstream junk(dir / "junk.ckpt", std::ios::binary);
    junk << "NOPE";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), Error);
}
