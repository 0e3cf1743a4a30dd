#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fasst/linalg.hpp"

namespace fasst {

enum class PrimaryKind { kDct = 0, kAdst = 1 };

std::string to_string(PrimaryKind kind);
PrimaryKind primary_kind_from_string(const std::string& s);

/// Separable primary transform. Rows of `matrix` are the basis functions:
/// DCT-II cosines, or DST-VII sines for the ADST.
struct PrimaryKernel {
  PrimaryKind kind = PrimaryKind::kDct;
  std::size_t n = 0;
  DenseMatrix matrix;

  /// Block sides 4, 8, 16 and 32.
  static PrimaryKernel make(PrimaryKind kind, std::size_t n);
};

/// Forward: K·B·Kᵀ. Inverse: Kᵀ·C·K.
DenseMatrix apply_primary(const DenseMatrix& block, const PrimaryKernel& kernel, bool inverse);

/// Coefficient positions (raster index r·N + c) ordered by descending
/// variance. The first `n_selected` feed the secondary transform.
struct ScanOrder {
  std::size_t block_size = 0;
  std::vector<std::size_t> permutation;
  std::size_t n_selected = 0;

  static ScanOrder raster(std::size_t block_size, std::size_t n_selected);
  bool valid() const;
  bool operator==(const ScanOrder&) const = default;
};

/// Sorts positions by sample variance, descending; ties go to the lower
/// raster index. The result does not depend on the order of `coeff_blocks`.
ScanOrder learn_scan_order(std::span<const DenseMatrix> coeff_blocks, std::size_t n_selected);

struct LowFreqSplit {
  std::vector<double> head;  // first n_selected coefficients in scan order
  std::vector<double> tail;  // the remaining N² − n_selected
};

LowFreqSplit extract_lowfreq(const DenseMatrix& coeffs, const ScanOrder& scan);
DenseMatrix reinsert_lowfreq(std::span<const double> head, std::span<const double> tail,
                             const ScanOrder& scan);

/// All N² coefficients of `coeffs` in scan order.
std::vector<double> scan_coefficients(const DenseMatrix& coeffs, const ScanOrder& scan);

}  // namespace fasst
