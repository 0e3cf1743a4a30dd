#include <cmath>
#include <random>

#include "doctest.h"
#include "fasst/baselines.hpp"
#include "fasst/sot.hpp"
#include "oracles.hpp"

using namespace fasst;

namespace {

DenseMatrix scaled_samples(std::size_t n, std::size_t m, const std::vector<double>& stddev, std::mt19937_64& rng) {
  DenseMatrix x = oracle::gaussian_matrix(n, m, rng);
  for (std::size_t r = 0; r < n; ++r)
    for (double& v : x.row(r)) v *= stddev[r];
  return x;
}

// Samples with a random (non-diagonal) covariance.
DenseMatrix correlated_samples(std::size_t n, std::size_t m, std::mt19937_64& rng, double scale) {
  const DenseMatrix mix = oracle::gaussian_matrix(n, n, rng);
  return scale * (mix * oracle::gaussian_matrix(n, m, rng));
}

}  // namespace

TEST_CASE("hard_threshold examples") {
  const std::vector<double> c{0.5, -3.0, 1e-9};
  CHECK(hard_threshold(c, 0.0) == c);
  CHECK(hard_threshold(std::vector<double>{3, -1, 2, 1.999}, 4.0) == std::vector<double>{3, 0, 2, 0});
  CHECK(hard_threshold(std::vector<double>{1.9, -1.9}, 4.0) == std::vector<double>{0, 0});
  CHECK_THROWS_AS(hard_threshold(c, -1.0), std::invalid_argument);

  // [1.9, −1.9] with F = I: zeroing both is the brute-force minimum.
  const std::vector<double> x{1.9, -1.9};
  const DenseMatrix eye = DenseMatrix::identity(2);
  CHECK(oracle::l0_brute_force(x, eye, 4.0) == doctest::Approx(1.9 * 1.9 * 2));
}

TEST_CASE("hard_threshold is the exact l0 minimizer") {
  std::mt19937_64 rng(101);
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + t % 6;
    const DenseMatrix f = oracle::random_orthonormal(n, rng);
    const DenseMatrix xm = oracle::random_matrix(n, 1, rng, -3, 3);
    const double mu = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
    const DenseMatrix y = hard_threshold(f.transposed() * xm, mu);
    const double got = sot_objective(xm, f, y, mu);
    const double want = oracle::l0_brute_force(xm.column(0), f, mu);
    mismatches += std::abs(got - want) > 1e-9 * (1.0 + want);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("sot_objective examples") {
  std::mt19937_64 rng(5);
  const DenseMatrix x = oracle::random_matrix(3, 7, rng);
  const DenseMatrix f = oracle::random_orthonormal(3, rng);
  CHECK(sot_objective(x, f, f.transposed() * x, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sot_objective(x, f, DenseMatrix(3, 7), 2.5) == doctest::Approx(x.frobenius_norm_squared()));

  const DenseMatrix single{{2.0}, {0.5}};
  CHECK(sot_objective(single, DenseOrthonormal::identity(2), 1.0) == doctest::Approx(1.25));
  CHECK_THROWS_AS(sot_objective(x, f, DenseMatrix(2, 7), 1.0), std::invalid_argument);
}

TEST_CASE("sot_learn with mu = 0 returns the initializer at zero cost") {
  std::mt19937_64 rng(6);
  const DenseMatrix x = oracle::random_matrix(4, 30, rng);
  const DenseOrthonormal init(oracle::random_orthonormal(4, rng));
  const SotModel m = sot_learn(x, 0.0, init);
  REQUIRE(m.objective_trace.size() == 1);
  CHECK(m.objective_trace[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(orthonormality_error(m.f.matrix()) < 1e-9);
}

TEST_CASE("sot_learn concentrates energy in the first coefficient") {
  std::mt19937_64 rng(7);
  const DenseMatrix x = scaled_samples(2, 400, {std::sqrt(10.0), 1.0}, rng);
  const SotModel m = sot_learn(x, 4.0);
  const DenseMatrix c = m.f.matrix().transposed() * x;
  double e0 = 0, e1 = 0;
  for (double v : c.row(0)) e0 += v * v;
  for (double v : c.row(1)) e1 += v * v;
  CHECK(e0 >= e1);
}

TEST_CASE("sot_learn improves on its KLT initializer") {
  std::mt19937_64 rng(8);
  const DenseMatrix x = correlated_samples(4, 50, rng, 1.0);
  const DenseOrthonormal klt = klt_learn(x);
  const SotModel m = sot_learn(x, 1.0, klt);
  CHECK(m.objective_trace.back() <= sot_objective(x, klt, 1.0) + 1e-9);
  CHECK(m.objective_trace.back() <= sot_objective(x, DenseOrthonormal::identity(4), 1.0) + 1e-9);
  CHECK(sot_objective(x, m.f, 1.0) == doctest::Approx(m.objective_trace.back()).epsilon(1e-10));
  CHECK(m.warnings.empty());
}

TEST_CASE("sot_learn objective is monotone and F stays orthonormal") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = seed % 2 ? 16 : 4;
    const DenseMatrix x = correlated_samples(n, 200, rng, 4.0);
    const double mu = std::pow(std::pow(2.0, (26.0 + seed % 6 - 4.0) / 6.0) / 2.0, 2.0);
    const SotModel m = sot_learn(x, mu);
    for (std::size_t k = 1; k < m.objective_trace.size(); ++k) {
      CHECK(m.objective_trace[k] <= m.objective_trace[k - 1] + 1e-9);
    }
    CHECK(orthonormality_error(m.f.matrix()) < 1e-9);
  }
}

TEST_CASE("sot_learn warns on too few samples and orders columns by energy") {
  std::mt19937_64 rng(9);
  const DenseMatrix x = correlated_samples(6, 4, rng, 1.0);
  const SotModel m = sot_learn(x, 0.5);
  CHECK(m.warnings.size() == 1);
  const DenseMatrix c = m.f.matrix().transposed() * x;
  for (std::size_t r = 1; r < c.rows(); ++r) {
    double prev = 0, cur = 0;
    for (double v : c.row(r - 1)) prev += v * v;
    for (double v : c.row(r)) cur += v * v;
    CHECK(prev >= cur);
  }
  CHECK_THROWS_AS(sot_learn(x, -1.0), std::invalid_argument);
}
