#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fasst/linalg.hpp"
#include "oracles.hpp"

using namespace fasst;

TEST_CASE("apply_givens examples") {
  std::vector<double> v{1, 2, 3};
  CHECK(apply_givens(v, {0, 1, 0.0}) == v);

  auto quarter = apply_givens(std::vector<double>{1, 0}, {0, 1, std::numbers::pi / 2});
  CHECK(quarter[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(quarter[1] == doctest::Approx(-1.0));

  auto zeroed = apply_givens(std::vector<double>{3, 4}, {0, 1, std::atan2(4.0, 3.0)});
  CHECK(zeroed[0] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(std::abs(zeroed[1]) < 1e-14);

  CHECK_THROWS_AS(apply_givens(std::vector<double>{1, 2}, {0, 2, 0.1}), std::out_of_range);
}

TEST_CASE("apply_givens leaves other coordinates bit-identical") {
  std::vector<double> v{0.1, -7.25, 3.5, 1e-300, 42.0};
  auto out = apply_givens(v, {3, 1, 0.77});
  CHECK(out[0] == v[0]);
  CHECK(out[2] == v[2]);
  CHECK(out[4] == v[4]);
}

TEST_CASE("rotation sequences preserve energy and invert") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> idx(0, 9);
  std::uniform_real_distribution<double> ang(-3.2, 3.2);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = oracle::gaussian_matrix(10, 1, rng).column(0);
    std::vector<GivensRotation> seq;
    for (int k = 0; k < 40; ++k) {
      std::size_t p = idx(rng), q = idx(rng);
      if (p == q) q = (q + 1) % 10;
      seq.push_back({p, q, ang(rng)});
    }
    auto y = x;
    for (const auto& g : seq) apply_givens_in_place(y, g);
    double ex = 0, ey = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      ex += x[i] * x[i];
      ey += y[i] * y[i];
    }
    CHECK(std::abs(std::sqrt(ey) - std::sqrt(ex)) <= 1e-12 * std::sqrt(ex));
    for (auto it = seq.rbegin(); it != seq.rend(); ++it) apply_givens_in_place(y, it->inverse());
    for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(y[i] - x[i]) <= 1e-12);
  }
}

TEST_CASE("givens_matrix agrees with vector application") {
  GivensRotation g{4, 1, 0.3};
  auto m = givens_matrix(6, g);
  std::vector<double> v{1, 2, 3, 4, 5, 6};
  auto a = multiply(m, v);
  auto b = apply_givens(v, g);
  for (std::size_t i = 0; i < 6; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
  DenseMatrix left = DenseMatrix::identity(6);
  apply_givens_left(left, g);
  CHECK(max_abs_difference(left, m) == 0.0);
  DenseMatrix right = DenseMatrix::identity(6);
  apply_givens_right(right, g);
  CHECK(max_abs_difference(right, m) == 0.0);
}

namespace {
DenseMatrix rot(double t) { return {{std::cos(t), std::sin(t)}, {-std::sin(t), std::cos(t)}}; }
}  // namespace

TEST_CASE("svd_2x2 trivial cases") {
  auto s = svd_2x2(1, 0, 0, 1);
  CHECK(s.alpha == 0.0);
  CHECK(s.beta == 0.0);
  CHECK(s.sigma1() == 1.0);
  CHECK(s.sigma2() == 1.0);

  s = svd_2x2(2, 0, 0, 1);
  CHECK(s.alpha == 0.0);
  CHECK(s.beta == 0.0);
  CHECK(s.sigma1() == 2.0);
  CHECK(s.sigma2() == 1.0);

  s = svd_2x2(0, 0, 0, 0);
  CHECK(s.alpha == 0.0);
  CHECK(s.beta == 0.0);
  CHECK(s.sigma1() == 0.0);
  CHECK(s.sigma2() == 0.0);
}

TEST_CASE("svd_2x2 diagonalizes random blocks and matches the oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    DenseMatrix a = oracle::random_matrix(2, 2, rng);
    auto s = svd_2x2(a);
    DenseMatrix d = rot(-s.alpha) * a * rot(s.beta);
    CHECK(std::abs(d(0, 1)) < 1e-14);
    CHECK(std::abs(d(1, 0)) < 1e-14);
    CHECK(d(0, 0) == doctest::Approx(s.d1).epsilon(1e-13));
    CHECK(d(1, 1) == doctest::Approx(s.d2).epsilon(1e-12));
    CHECK(d(0, 0) >= std::abs(d(1, 1)) - 1e-14);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    if (std::abs(det) > 1e-12) CHECK((d(1, 1) < 0) == (det < 0));
    auto ref = oracle::singular_values(a);
    CHECK(std::abs(s.sigma1() - ref[0]) < 1e-10);
    CHECK(std::abs(s.sigma2() - ref[1]) < 1e-10);
    // d1 + d2 is the best trace over all rotation pairs (dense angle scan).
    double best = -INFINITY;
    for (int k = 0; k < 720; ++k) {
      const double w = k * std::numbers::pi / 360.0;
      // tr(R(−α)·a·R(β)) depends only on β − α.
      best = std::max(best, oracle::trace_of_product(a, rot(w)));
    }
    CHECK(s.d1 + s.d2 >= best - 1e-12);
  }
}

TEST_CASE("jacobi_svd trivial inputs") {
  auto r = jacobi_svd(DenseMatrix::identity(4));
  CHECK(r.singular == std::vector<double>{1, 1, 1, 1});

  auto d = jacobi_svd(DenseMatrix{{3, 0, 0}, {0, 2, 0}, {0, 0, 1}});
  CHECK(d.singular == std::vector<double>{3, 2, 1});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(std::abs(d.u(i, i)) - 1.0) < 1e-15);
    CHECK(std::abs(std::abs(d.v(i, i)) - 1.0) < 1e-15);
  }

  auto z = jacobi_svd(DenseMatrix(3, 3));
  CHECK(z.singular == std::vector<double>{0, 0, 0});

  CHECK_THROWS_AS(jacobi_svd(DenseMatrix(2, 3)), std::invalid_argument);
}

TEST_CASE("jacobi_svd reconstructs random matrices") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    for (std::size_t n : {2u, 5u, 6u, 9u, 16u}) {
      DenseMatrix m = oracle::random_matrix(n, n, rng);
      auto r = jacobi_svd(m);
      DenseMatrix recon = r.u * DenseMatrix::diagonal(r.singular) * r.v.transposed();
      CHECK((recon - m).frobenius_norm() <= 1e-10 * m.frobenius_norm());
      CHECK(orthonormality_error(r.u) <= 1e-10);
      CHECK(orthonormality_error(r.v) <= 1e-10);
      for (std::size_t i = 1; i < n; ++i) CHECK(r.singular[i - 1] >= r.singular[i]);
      auto ref = oracle::singular_values(m);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r.singular[i] - ref[i]) <= 1e-9);
    }
  }
}

TEST_CASE("jacobi_svd reports non-convergence") {
  std::mt19937_64 rng(1);
  DenseMatrix m = oracle::random_matrix(12, 12, rng);
  CHECK_THROWS_AS(jacobi_svd(m, {1e-15, 1}), ConvergenceError);
}

TEST_CASE("jacobi_svd handles rank deficiency") {
  DenseMatrix m{{1, 2, 3}, {2, 4, 6}, {0, 0, 0}};
  auto r = jacobi_svd(m);
  DenseMatrix recon = r.u * DenseMatrix::diagonal(r.singular) * r.v.transposed();
  CHECK((recon - m).frobenius_norm() <= 1e-12 * m.frobenius_norm());
  CHECK(r.singular[1] < 1e-12);
  CHECK(r.singular[2] < 1e-12);
}

TEST_CASE("jacobi_eigh matches the oracle") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    DenseMatrix a = oracle::random_matrix(7, 7, rng);
    DenseMatrix s = a + a.transposed();
    auto e = jacobi_eigh(s);
    auto ref = oracle::symmetric_eigenvalues(s);
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(e.values[i] - ref[i]) < 1e-10);
    CHECK(orthonormality_error(e.vectors) < 1e-12);
    DenseMatrix recon = e.vectors * DenseMatrix::diagonal(e.values) * e.vectors.transposed();
    CHECK(max_abs_difference(recon, s) < 1e-12);
  }
}

TEST_CASE("procrustes examples") {
  auto f = procrustes(DenseMatrix::identity(4));
  CHECK(max_abs_difference(f.matrix(), DenseMatrix::identity(4)) < 1e-15);
  CHECK(oracle::trace_of_product(DenseMatrix::identity(4), f.matrix()) == doctest::Approx(4.0));

  DenseMatrix g = rot(0.3);
  auto fr = procrustes(g);
  CHECK(oracle::trace_of_product(g, fr.matrix()) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("procrustes dominates random orthonormal matrices") {
  std::mt19937_64 rng(21);
  for (int instance = 0; instance < 5; ++instance) {
    DenseMatrix gamma = oracle::random_matrix(5, 5, rng);
    auto f = procrustes(gamma);
    const double best = oracle::trace_of_product(gamma, f.matrix());
    auto sv = oracle::singular_values(gamma);
    double sum = 0;
    for (double s : sv) sum += s;
    CHECK(std::abs(best - sum) <= 1e-9 * sum);
    for (int k = 0; k < 10000; ++k) {
      CHECK(oracle::trace_of_product(gamma, oracle::random_orthonormal(5, rng)) <= best + 1e-12);
    }
  }
}

TEST_CASE("DenseOrthonormal rejects non-orthonormal input") {
  CHECK_THROWS_AS(DenseOrthonormal(DenseMatrix{{1, 0}, {0, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(DenseOrthonormal(DenseMatrix(2, 3)), std::invalid_argument);
  CHECK_NOTHROW(DenseOrthonormal(rot(1.0)));
}
