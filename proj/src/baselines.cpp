#include "fasst/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace fasst {

DenseOrthonormal klt_learn(const DenseMatrix& x) {
  if (x.cols() < 2) throw std::invalid_argument("klt_learn: need at least 2 samples");
  DenseMatrix cov = multiply_abt(x, x);
  const double inv_m = 1.0 / static_cast<double>(x.cols());
  for (double& v : cov.values()) v *= inv_m;
  EigenResult eig = jacobi_eigh(cov);
  DenseMatrix& vecs = eig.vectors;
  const std::size_t n = vecs.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < n; ++r) {
      if (std::abs(vecs(r, c)) > std::abs(vecs(arg, c))) arg = r;
    }
    if (vecs(arg, c) < 0.0) {
      for (std::size_t r = 0; r < n; ++r) vecs(r, c) = -vecs(r, c);
    }
  }
  return DenseOrthonormal(std::move(vecs));
}

std::vector<double> ReducedKernel::forward(std::span<const double> x) const {
  if (x.size() != n) throw std::invalid_argument("ReducedKernel::forward: length mismatch");
  return multiply(matrix, x);
}

std::vector<double> ReducedKernel::inverse(std::span<const double> y) const {
  if (y.size() != n_k) throw std::invalid_argument("ReducedKernel::inverse: length mismatch");
  return multiply_transposed(matrix, y);
}

void ReducedKernel::validate() const {
  if (n_k > n || matrix.rows() != n_k || matrix.cols() != n) {
    throw std::invalid_argument("ReducedKernel: inconsistent shape");
  }
  const DenseMatrix gram = multiply_abt(matrix, matrix);
  if (max_abs_difference(gram, DenseMatrix::identity(n_k)) > 1e-9) {
    throw std::invalid_argument("ReducedKernel: rows are not orthonormal");
  }
}

ReducedKernel lfnst_from_klt(const DenseOrthonormal& k, std::size_t n_k) {
  const std::size_t n = k.n();
  if (n_k == 0 || n_k > n) throw std::invalid_argument("lfnst_from_klt: n_k out of range");
  ReducedKernel out{n, n_k, DenseMatrix(n_k, n)};
  for (std::size_t r = 0; r < n_k; ++r) {
    for (std::size_t c = 0; c < n; ++c) out.matrix(r, c) = k(c, r);
  }
  return out;
}

ReducedKernel lf_sot(const SotModel& sot, std::size_t n_k) { return lfnst_from_klt(sot.f, n_k); }

FasstKernel klt_gr(const DenseOrthonormal& k, double tau, std::size_t j_max) {
  return factorize_approx(align_to_identity(k).matrix().transposed(), tau, j_max);
}

}  // namespace fasst
