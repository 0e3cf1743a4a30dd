#pragma once

#include <span>
#include <string>
#include <vector>

#include "fasst/linalg.hpp"

namespace fasst {

/// Keeps c[j] where |c[j]| ≥ √mu and zeroes the rest; the boundary is kept.
std::vector<double> hard_threshold(std::span<const double> c, double mu);
/// Entry-wise hard threshold of a coefficient matrix (one sample per column).
DenseMatrix hard_threshold(const DenseMatrix& coeffs, double mu);

/// Σ_i ‖x_i − F·y_i‖² + mu·‖y_i‖₀ over the columns of `x` and `y`.
double sot_objective(const DenseMatrix& x, const DenseMatrix& f, const DenseMatrix& y, double mu);
/// Objective with y = hard_threshold(Fᵀx), the optimal coefficients for F.
double sot_objective(const DenseMatrix& x, const DenseOrthonormal& f, double mu);

struct SotOptions {
  int max_iter = 100;
  double eps = 1e-6;  // relative objective change
  JacobiOptions svd{};
};

struct SotModel {
  DenseOrthonormal f;
  double mu = 0.0;
  /// Objective after each thresholding step; non-increasing.
  std::vector<double> objective_trace;
  std::vector<std::string> warnings;
};

/// Alternates hard thresholding of FᵀX and the Procrustes update F = V·Uᵀ
/// from the SVD of Y·Xᵀ. Samples are the columns of `x`. The returned F has
/// its columns ordered by descending coefficient energy on `x`.
SotModel sot_learn(const DenseMatrix& x, double mu, const DenseOrthonormal& init, const SotOptions& opts = {});
/// Same, initialized with the KLT of `x`.
SotModel sot_learn(const DenseMatrix& x, double mu, const SotOptions& opts = {});

/// Reorders the columns of `f` by descending energy of Fᵀx (stable).
DenseOrthonormal order_by_energy(const DenseOrthonormal& f, const DenseMatrix& x);

}  // namespace fasst
