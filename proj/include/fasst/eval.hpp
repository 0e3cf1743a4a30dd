#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fasst/codec.hpp"
#include "fasst/linalg.hpp"
#include "fasst/secondary.hpp"

namespace fasst {

inline constexpr double kPsnrPeak = 255.0;
/// PSNR reported for a lossless (SSE = 0) point.
inline constexpr double kPsnrCeiling = 99.0;

double psnr_db(double sse, std::size_t pixels);

struct RdPoint {
  int qp = 0;
  double rate_bits = 0.0;  // per block
  double psnr_db = 0.0;
  double sse = 0.0;  // total
  bool operator==(const RdPoint&) const = default;
};

struct RdCurve {
  std::string label;
  std::vector<RdPoint> points;  // ascending rate
};

/// Blocks sharing one candidate set (one prediction mode, one block size).
struct EvalGroup {
  std::span<const DenseMatrix> blocks;
  const CandidateSet* candidates = nullptr;
};

struct RdTotals {
  std::uint64_t bits = 0;
  double sse = 0.0;
  std::size_t pixels = 0;
  std::size_t blocks = 0;
  /// Blocks per chosen candidate, Candidate order.
  std::array<std::size_t, 4> choices{};
};

/// Encodes every block with encode_block_rdo; SSE is summed in block order.
RdTotals encode_all(std::span<const EvalGroup> groups, const QuantConfig& qc);
RdPoint rd_point(int qp, const RdTotals& totals);

/// One point per QP over all groups. Throws std::invalid_argument for fewer
/// than four QPs.
RdCurve build_rd_curve(std::string label, std::span<const EvalGroup> groups, std::span<const int> qps,
                       const QuantOverrides& overrides = {});

enum class BdVariant { kCubic, kPchip };

/// Bjøntegaard delta rate of `test` against `anchor` in percent (negative is
/// a saving). kCubic fits a least-squares cubic of ln(rate) over PSNR;
/// kPchip interpolates piecewise-cubically. Both integrate over the common
/// PSNR range. Throws std::invalid_argument with fewer than four points or
/// non-overlapping ranges.
double bd_rate(const RdCurve& test, const RdCurve& anchor, BdVariant variant = BdVariant::kCubic);

struct ComplexityReport {
  std::string method;
  std::size_t n = 0;
  double multiplications = 0.0;  // per transform call; an average for mode-adaptive
  double additions = 0.0;
  double fraction_vs_klt = 0.0;  // multiplications / n²
  /// Counts for the two-pass rotation application actually executed (8J / 4J).
  std::optional<double> actual_multiplications;
  std::optional<double> actual_additions;
};

ComplexityReport complexity_klt(std::size_t n);
ComplexityReport complexity_lfnst(std::size_t n, std::size_t n_k);
/// 4J multiplications and 2J additions.
ComplexityReport complexity_fasst(std::size_t n, std::size_t j);
/// Rotation counts averaged over modes.
ComplexityReport complexity_fasst_adaptive(std::size_t n, std::span<const std::size_t> j_per_mode);

struct CorrelationSummary {
  DenseMatrix correlation;  // Pearson, n×n
  double off_diagonal_energy = 0.0;
  double diagonal_energy = 0.0;
  /// Indices whose sample variance is zero; their rows/columns are 0.
  std::vector<std::size_t> zero_variance;
};

/// Pearson correlation of the rows of `x` (one sample per column), after the
/// optional secondary kernel's forward transform. Needs at least 2 samples.
CorrelationSummary correlation_inspect(const DenseMatrix& x, const SecondaryKernel* kernel = nullptr);

}  // namespace fasst
