#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fasst/baselines.hpp"
#include "fasst/fasst.hpp"
#include "fasst/linalg.hpp"

namespace fasst {

/// Any secondary kernel the codec can run: a dense orthonormal matrix (KLT,
/// SOT), a reduced kernel (LFNST, LF-SOT) or a Givens product (FaSST, KLT-GR).
class SecondaryKernel {
 public:
  using Variant = std::variant<DenseOrthonormal, ReducedKernel, FasstKernel>;

  SecondaryKernel(DenseOrthonormal k) : k_(std::move(k)) {}
  SecondaryKernel(ReducedKernel k) : k_(std::move(k)) {}
  SecondaryKernel(FasstKernel k) : k_(std::move(k)) {}

  std::size_t input_size() const;
  /// Coefficients produced by forward(); smaller than input_size() only for
  /// reduced kernels.
  std::size_t output_size() const;

  /// Dense: Fᵀx. Reduced: first n_k rows. Givens: S_Jᵀx.
  std::vector<double> forward(std::span<const double> x) const;
  /// Maps output_size() coefficients back to input_size(), zero-filling what
  /// a reduced kernel dropped.
  std::vector<double> inverse(std::span<const double> y) const;

  /// The n×n matrix whose columns are the basis vectors. Throws
  /// std::logic_error for reduced kernels, which have no square form.
  DenseOrthonormal dense() const;

  const Variant& variant() const { return k_; }
  std::string type_name() const;

 private:
  Variant k_;
};

}  // namespace fasst
