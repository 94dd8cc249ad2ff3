#include "grain/kernels.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "grain/matrix.hpp"
#include "grain/rng.hpp"

using grain::Matrix;
namespace k = grain::kernels;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  grain::Rng rng(seed);
  for (double& v : m.values) {
    v = rng.normal();
  }
  return m;
}

Matrix from_rows(std::size_t rows, std::size_t cols, std::vector<double> values) {
  Matrix m(rows, cols);
  m.values = std::move(values);
  return m;
}

}  // namespace

TEST_CASE("affine matches a hand-computed case") {
  // [1 2; 3 4] * [5 6; 7 8] + [10, 20] = [29 42; 53 70]
  const Matrix x = from_rows(2, 2, {1, 2, 3, 4});
  const Matrix w = from_rows(2, 2, {5, 6, 7, 8});
  const std::vector<double> bias{10, 20};
  Matrix out;
  k::ref::affine(x, w, bias, out);
  CHECK(out == from_rows(2, 2, {29, 42, 53, 70}));
}

TEST_CASE("matmul_at_b matches a hand-computed case") {
  // a^T b with a = [1 2; 3 4] (2x2), b = [5; 6] (2x1):
  // a^T = [1 3; 2 4], a^T b = [1*5+3*6; 2*5+4*6] = [23; 34]
  const Matrix a = from_rows(2, 2, {1, 2, 3, 4});
  const Matrix b = from_rows(2, 1, {5, 6});
  Matrix out;
  k::ref::matmul_at_b(a, b, out);
  CHECK(out == from_rows(2, 1, {23, 34}));
}

TEST_CASE("matmul_a_bt matches a hand-computed case") {
  // a b^T with a = [1 2] (1x2), b = [3 4; 5 6] (2x2): [1*3+2*4, 1*5+2*6] = [11, 17]
  const Matrix a = from_rows(1, 2, {1, 2});
  const Matrix b = from_rows(2, 2, {3, 4, 5, 6});
  Matrix out;
  k::ref::matmul_a_bt(a, b, out);
  CHECK(out == from_rows(1, 2, {11, 17}));
}

TEST_CASE("relu clamps negatives and keeps zeros and positives") {
  Matrix m = from_rows(1, 4, {-1.5, 0.0, 2.5, -0.0});
  k::ref::relu(m);
  CHECK(m.values == std::vector<double>{0.0, 0.0, 2.5, 0.0});
}

TEST_CASE("relu_backward zeroes gradients exactly where activation is zero") {
  const Matrix act = from_rows(1, 4, {0.0, 1.0, 0.0, 3.0});
  Matrix grad = from_rows(1, 4, {5.0, 6.0, 7.0, 8.0});
  k::ref::relu_backward(act, grad);
  CHECK(grad.values == std::vector<double>{0.0, 6.0, 0.0, 8.0});
}

TEST_CASE("softmax rows sum to one and order is preserved") {
  Matrix m = from_rows(2, 3, {1.0, 2.0, 3.0, -1.0, -1.0, -1.0});
  k::ref::softmax_rows(m);
  for (std::size_t i = 0; i < 2; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      sum += m(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(m(0, 0) < m(0, 1));
  CHECK(m(0, 1) < m(0, 2));
  CHECK(m(1, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax is stable for large logits") {
  Matrix m = from_rows(1, 3, {1000.0, 1001.0, 999.0});
  k::ref::softmax_rows(m);
  double sum = 0.0;
  for (double v : m.values) {
    CHECK(std::isfinite(v));
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("col_sums matches a hand-computed case") {
  const Matrix m = from_rows(3, 2, {1, 10, 2, 20, 3, 30});
  std::vector<double> out(2);
  k::ref::col_sums(m, out);
  CHECK(out == std::vector<double>{6, 60});
}

TEST_CASE("argmax_rows resolves ties to the lowest index") {
  const Matrix m = from_rows(3, 3, {0, 1, 1, 2, 2, 0, 5, 5, 5});
  CHECK(k::ref::argmax_rows(m) == std::vector<int>{1, 0, 0});
}

TEST_CASE("kernels reject mismatched shapes") {
  const Matrix a = random_matrix(3, 4, 1);
  const Matrix b = random_matrix(5, 4, 2);
  Matrix out;
  std::vector<double> bias(3);
  CHECK_THROWS_AS(k::affine(a, b, bias, out), std::invalid_argument);
  CHECK_THROWS_AS(k::matmul_at_b(a, b, out), std::invalid_argument);
  Matrix c = random_matrix(3, 5, 3);
  CHECK_THROWS_AS(k::matmul_a_bt(a, c, out), std::invalid_argument);
  Matrix grad = random_matrix(3, 5, 4);
  CHECK_THROWS_AS(k::relu_backward(a, grad), std::invalid_argument);
  std::vector<double> sums(3);  // wrong length for 4 columns
  CHECK_THROWS_AS(k::col_sums(a, sums), std::invalid_argument);
}

// The parallel kernels promise bit-identical results to the serial
// reference for any shape, including sizes that do not divide evenly across
// threads. Exact ==, not approximate.
TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  const std::vector<std::array<std::size_t, 3>> shapes{
      {1, 1, 1}, {2, 3, 5}, {17, 31, 7}, {64, 16, 10}, {129, 33, 65}};
  std::uint64_t seed = 100;
  for (const auto& [n, d, m] : shapes) {
    CAPTURE(n);
    CAPTURE(d);
    CAPTURE(m);
    const Matrix x = random_matrix(n, d, seed++);
    const Matrix w = random_matrix(d, m, seed++);
    std::vector<double> bias(m);
    grain::Rng brng(seed++);
    for (double& v : bias) {
      v = brng.normal();
    }

    Matrix serial, parallel;
    k::ref::affine(x, w, bias, serial);
    k::affine(x, w, bias, parallel);
    CHECK(serial == parallel);

    const Matrix b2 = random_matrix(n, m, seed++);
    k::ref::matmul_at_b(x, b2, serial);
    k::matmul_at_b(x, b2, parallel);
    CHECK(serial == parallel);

    const Matrix b3 = random_matrix(m, d, seed++);
    k::ref::matmul_a_bt(x, b3, serial);
    k::matmul_a_bt(x, b3, parallel);
    CHECK(serial == parallel);

    Matrix r1 = random_matrix(n, d, seed);
    Matrix r2 = r1;
    k::ref::relu(r1);
    k::relu(r2);
    CHECK(r1 == r2);

    Matrix g1 = random_matrix(n, d, seed + 1);
    Matrix g2 = g1;
    k::ref::relu_backward(r1, g1);
    k::relu_backward(r2, g2);
    CHECK(g1 == g2);

    Matrix s1 = random_matrix(n, d, seed + 2);
    Matrix s2 = s1;
    k::ref::softmax_rows(s1);
    k::softmax_rows(s2);
    CHECK(s1 == s2);

    std::vector<double> c1(d), c2(d);
    k::ref::col_sums(r1, c1);
    k::col_sums(r1, c2);
    CHECK(c1 == c2);

    CHECK(k::ref::argmax_rows(s1) == k::argmax_rows(s1));
    seed += 3;
  }
}
