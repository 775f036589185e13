#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "rlab/error.hpp"
#include "rlab/kernels.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

namespace {

// Independent oracles, written without the library kernels.
DenseArray naive_matmul(const DenseArray& a, const DenseArray& b) {
  DenseArray c(Shape{a.rows(), b.cols()});
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      float acc = 0.0f;
      for (int k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, j);
      c.at(i, j) = acc;
    }
  return c;
}

std::vector<double> direct_softmax(const std::vector<double>& x) {
  double z = 0.0;
  for (double v : x) z += std::exp(v);
  std::vector<double> out;
  for (double v : x) out.push_back(std::exp(v) / z);
  return out;
}

}  // namespace

TEST_CASE("shape validation") {
  CHECK(Shape{2, 3}.numel() == 6);
  CHECK(Shape{3, 16, 16}.rank() == 3);
  CHECK_THROWS_AS(Shape({0, 3}), Error);
  CHECK_THROWS_AS(Shape({1, 1, 1, 1, 1}), Error);
  CHECK_THROWS_AS(Shape({-2}), Error);
  CHECK_THROWS_AS(DenseArray(Shape{2, 2}, std::vector<float>{1, 2, 3}), Error);
}

TEST_CASE("matmul closed-form cases") {
  const DenseArray id(Shape{2, 2}, std::vector<float>{1, 0, 0, 1});
  const DenseArray b(Shape{2, 2}, std::vector<float>{5, 6, 7, 8});
  CHECK(matmul(id, b) == b);

  const DenseArray row(Shape{1, 2}, std::vector<float>{1, 2});
  const DenseArray col(Shape{2, 1}, std::vector<float>{3, 4});
  CHECK(matmul(row, col)[0] == 11.0f);
}

TEST_CASE("matmul shape mismatch is a dimension error") {
  try {
    matmul(DenseArray(Shape{2, 3}), DenseArray(Shape{2, 3}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
}

TEST_CASE("matmul equals the naive oracle bitwise for all shapes up to 16x16") {
  std::uint64_t seed = 1;
  for (int m = 1; m <= 16; m += 3)
    for (int k = 1; k <= 16; k += 5)
      for (int n = 1; n <= 16; n += 4) {
        const auto a = test::random_array(Shape{m, k}, seed++);
        const auto b = test::random_array(Shape{k, n}, seed++);
        const auto oracle = naive_matmul(a, b);
        CHECK(bitwise_equal(matmul(a, b), oracle));
        CHECK(bitwise_equal(reference::matmul(a, b), oracle));
      }
  const auto a = test::random_array(Shape{8, 8}, 100), b = test::random_array(Shape{8, 8}, 101);
  CHECK(bitwise_equal(matmul(a, b), naive_matmul(a, b)));
}

TEST_CASE("matmul_nt and matmul_tn match explicit transposes") {
  const auto a = test::random_array(Shape{5, 7}, 3), b = test::random_array(Shape{4, 7}, 4);
  CHECK(bitwise_equal(matmul_nt(a, b), naive_matmul(a, transpose(b))));
  const auto c = test::random_array(Shape{7, 5}, 5), d = test::random_array(Shape{7, 3}, 6);
  CHECK(bitwise_equal(matmul_tn(c, d), naive_matmul(transpose(c), d)));
}

TEST_CASE("large matmul takes the parallel path and still matches the serial reference") {
  const auto a = test::random_array(Shape{96, 80}, 7), b = test::random_array(Shape{80, 90}, 8);
  CHECK(bitwise_equal(matmul(a, b), reference::matmul(a, b)));
}

TEST_CASE("softmax examples") {
  const auto u = softmax_rows(DenseArray(Shape{1, 3}, std::vector<float>{0, 0, 0}));
  for (int c = 0; c < 3; ++c) CHECK(u.at(0, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

  const auto big = softmax_rows(DenseArray(Shape{1, 2}, std::vector<float>{1000, 0}));
  CHECK(std::abs(big.at(0, 0) - 1.0) < 1e-6);
  CHECK(std::abs(big.at(0, 1)) < 1e-6);
  CHECK(big.all_finite());

  const auto s = softmax_rows(DenseArray(Shape{1, 3}, std::vector<float>{1, 2, 3}));
  const auto oracle = direct_softmax({1, 2, 3});
  for (int c = 0; c < 3; ++c) CHECK(std::abs(s.at(0, c) - oracle[static_cast<std::size_t>(c)]) < 1e-6);
}

TEST_CASE("property: softmax rows are probability vectors for random finite logits") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SeededRng rng(seed);
    const int rows = 1 + static_cast<int>(rng.below(20)), cols = 1 + static_cast<int>(rng.below(70));
    const float scale = static_cast<float>(std::pow(10.0, rng.uniform() * 6.0 - 2.0));
    const auto logits = test::random_array(Shape{rows, cols}, seed + 1000, scale);
    const auto p = softmax_rows(logits);
    CHECK(bitwise_equal(p, reference::softmax_rows(logits)));
    for (int r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (int c = 0; c < cols; ++c) {
        CHECK(p.at(r, c) >= 0.0f);
        sum += p.at(r, c);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("gaussian stream determinism and separation") {
  SeededRng a(7), b(7), c(8);
  const auto va = gaussian(a, Shape{4}), vb = gaussian(b, Shape{4}), vc = gaussian(c, Shape{4});
  CHECK(bitwise_equal(va, vb));
  CHECK_FALSE(va == vc);
  CHECK(a.position() == b.position());
}

TEST_CASE("gaussian moments over 1e5 samples") {
  SeededRng rng(12345);
  const auto g = gaussian(rng, Shape{100000});
  double mean = 0.0;
  for (float v : g.span()) mean += v;
  mean /= static_cast<double>(g.size());
  double var = 0.0;
  for (float v : g.span()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(g.size());
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("uniform stays in (0, 1] and below() respects its bound") {
  SeededRng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK((u > 0.0 && u <= 1.0));
    CHECK(rng.below(7) < 7u);
  }
}

TEST_CASE("derive_seed separates streams and is order sensitive") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
}

TEST_CASE("array helpers") {
  DenseArray a(Shape{2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  CHECK(a.reshaped(Shape{3, 2}).at(2, 1) == 6.0f);
  CHECK_THROWS_AS(a.reshaped(Shape{4, 2}), Error);
  CHECK(a.all_finite());
  a[1] = std::nanf("");
  CHECK_FALSE(a.all_finite());
  const auto d = array_cast<double>(DenseArray(Shape{2}, std::vector<float>{0.5f, -1.0f}));
  CHECK(d[0] == 0.5);
}
