#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fasst/fasst.hpp"
#include "fasst/linalg.hpp"
#include "fasst/sot.hpp"

namespace fasst {

/// Eigenvectors of (1/m)·X·Xᵀ as columns, eigenvalues descending. Each
/// eigenvector is signed so that its largest-magnitude entry is positive
/// (first such entry on ties).
DenseOrthonormal klt_learn(const DenseMatrix& x);

/// First n_k basis vectors of an orthonormal kernel, stored as rows. The
/// forward transform produces n_k coefficients; the inverse zero-pads the
/// dropped ones.
struct ReducedKernel {
  std::size_t n = 0;
  std::size_t n_k = 0;
  DenseMatrix matrix;  // n_k × n

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> inverse(std::span<const double> y) const;
  void validate() const;
  bool operator==(const ReducedKernel&) const = default;
};

ReducedKernel lfnst_from_klt(const DenseOrthonormal& k, std::size_t n_k);
ReducedKernel lf_sot(const SotModel& sot, std::size_t n_k);

/// Givens approximation of a given orthonormal K: aligns K's columns to the
/// identity (signs and order carry no information for a KLT), then
/// factorizes Γ = Kᵀ so that tr(Kᵀ·S_J) is greedily maximized.
FasstKernel klt_gr(const DenseOrthonormal& k, double tau, std::size_t j_max);

}  // namespace fasst
