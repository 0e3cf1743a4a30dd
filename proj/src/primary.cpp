#include "fasst/primary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace fasst {

std::string to_string(PrimaryKind kind) { return kind == PrimaryKind::kDct ? "DCT" : "ADST"; }

PrimaryKind primary_kind_from_string(const std::string& s) {
  if (s == "DCT") return PrimaryKind::kDct;
  if (s == "ADST") return PrimaryKind::kAdst;
  throw std::invalid_argument("unknown primary kind: " + s);
}

PrimaryKernel PrimaryKernel::make(PrimaryKind kind, std::size_t n) {
  if (n != 4 && n != 8 && n != 16 && n != 32) {
    throw std::invalid_argument("PrimaryKernel: block side must be 4, 8, 16 or 32");
  }
  PrimaryKernel k;
  k.kind = kind;
  k.n = n;
  k.matrix = DenseMatrix(n, n);
  const double pi = std::numbers::pi;
  const double dn = static_cast<double>(n);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t i = 0; i < n; ++i) {
      if (kind == PrimaryKind::kDct) {
        const double scale = row == 0 ? std::sqrt(1.0 / dn) : std::sqrt(2.0 / dn);
        k.matrix(row, i) = scale * std::cos(pi * (2.0 * i + 1.0) * row / (2.0 * dn));
      } else {
        k.matrix(row, i) = 2.0 / std::sqrt(2.0 * dn + 1.0) *
                           std::sin(pi * (2.0 * row + 1.0) * (i + 1.0) / (2.0 * dn + 1.0));
      }
    }
  }
  return k;
}

DenseMatrix apply_primary(const DenseMatrix& block, const PrimaryKernel& kernel, bool inverse) {
  if (block.rows() != kernel.n || block.cols() != kernel.n) {
    throw std::invalid_argument("apply_primary: block side does not match kernel");
  }
  if (!inverse) return multiply_abt(kernel.matrix * block, kernel.matrix);
  const DenseMatrix kt = kernel.matrix.transposed();
  return kt * block * kernel.matrix;
}

// ---------------------------------------------------------------------------

ScanOrder ScanOrder::raster(std::size_t block_size, std::size_t n_selected) {
  ScanOrder s;
  s.block_size = block_size;
  s.permutation.resize(block_size * block_size);
  std::iota(s.permutation.begin(), s.permutation.end(), std::size_t{0});
  s.n_selected = n_selected;
  if (!s.valid()) throw std::invalid_argument("ScanOrder: n_selected exceeds block area");
  return s;
}

bool ScanOrder::valid() const {
  const std::size_t area = block_size * block_size;
  if (permutation.size() != area || n_selected > area) return false;
  std::vector<bool> seen(area, false);
  for (std::size_t p : permutation) {
    if (p >= area || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

ScanOrder learn_scan_order(std::span<const DenseMatrix> coeff_blocks, std::size_t n_selected) {
  if (coeff_blocks.size() < 2) throw std::invalid_argument("learn_scan_order: need at least 2 blocks");
  const std::size_t side = coeff_blocks.front().rows();
  const std::size_t area = side * side;
  if (n_selected > area) throw std::invalid_argument("learn_scan_order: n exceeds block area");
  for (const auto& b : coeff_blocks) {
    if (b.rows() != side || b.cols() != side) {
      throw std::invalid_argument("learn_scan_order: blocks differ in size");
    }
  }

  // Values are sorted per position before summation so the variance is
  // bit-identical under any reordering of the input.
  const double count = static_cast<double>(coeff_blocks.size());
  std::vector<double> variance(area);
  std::vector<double> samples(coeff_blocks.size());
  for (std::size_t pos = 0; pos < area; ++pos) {
    for (std::size_t b = 0; b < coeff_blocks.size(); ++b) samples[b] = coeff_blocks[b].values()[pos];
    std::sort(samples.begin(), samples.end());
    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / count;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    variance[pos] = ss / (count - 1.0);
  }

  ScanOrder scan;
  scan.block_size = side;
  scan.n_selected = n_selected;
  scan.permutation.resize(area);
  std::iota(scan.permutation.begin(), scan.permutation.end(), std::size_t{0});
  std::stable_sort(scan.permutation.begin(), scan.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return variance[a] > variance[b]; });
  return scan;
}

namespace {
void check_scan(const DenseMatrix& coeffs, const ScanOrder& scan) {
  if (coeffs.rows() != scan.block_size || coeffs.cols() != scan.block_size) {
    throw std::invalid_argument("scan order does not match block size");
  }
}
}  // namespace

LowFreqSplit extract_lowfreq(const DenseMatrix& coeffs, const ScanOrder& scan) {
  check_scan(coeffs, scan);
  const auto v = coeffs.values();
  LowFreqSplit out;
  out.head.reserve(scan.n_selected);
  out.tail.reserve(v.size() - scan.n_selected);
  for (std::size_t i = 0; i < scan.permutation.size(); ++i) {
    (i < scan.n_selected ? out.head : out.tail).push_back(v[scan.permutation[i]]);
  }
  return out;
}

DenseMatrix reinsert_lowfreq(std::span<const double> head, std::span<const double> tail,
                             const ScanOrder& scan) {
  if (head.size() != scan.n_selected || head.size() + tail.size() != scan.permutation.size()) {
    throw std::invalid_argument("reinsert_lowfreq: length mismatch");
  }
  DenseMatrix out(scan.block_size, scan.block_size);
  auto v = out.values();
  for (std::size_t i = 0; i < head.size(); ++i) v[scan.permutation[i]] = head[i];
  for (std::size_t i = 0; i < tail.size(); ++i) v[scan.permutation[head.size() + i]] = tail[i];
  return out;
}

std::vector<double> scan_coefficients(const DenseMatrix& coeffs, const ScanOrder& scan) {
  check_scan(coeffs, scan);
  const auto v = coeffs.values();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[scan.permutation[i]];
  return out;
}

}  // namespace fasst
