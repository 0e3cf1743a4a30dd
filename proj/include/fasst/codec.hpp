#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fasst/primary.hpp"
#include "fasst/secondary.hpp"

namespace fasst {

/// Fixed λ and/or μ applied to every QP in place of the derived values.
struct QuantOverrides {
  std::optional<double> lambda;
  std::optional<double> mu;
};

/// Quantizer step, Lagrange multiplier and sparsity weight for a QP:
///   q_step = 2^((qp−4)/6), lambda = 0.85·2^((qp−12)/3), mu = (q_step/2)².
/// lambda and mu may be overridden; q_step always follows qp.
class QuantConfig {
 public:
  explicit QuantConfig(int qp, std::optional<double> lambda_override = std::nullopt,
                       std::optional<double> mu_override = std::nullopt);
  QuantConfig(int qp, const QuantOverrides& o) : QuantConfig(qp, o.lambda, o.mu) {}
  int qp() const { return qp_; }
  double q_step() const { return q_step_; }
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }

 private:
  int qp_;
  double q_step_;
  double lambda_;
  double mu_;
};

/// level = round-half-away-from-zero(c / q_step).
std::vector<std::int32_t> quantize(std::span<const double> coeffs, double q_step);
std::vector<double> dequantize(std::span<const std::int32_t> levels, double q_step);

/// Bits for one coded vector of length L:
///   signaling_bits
/// + bit_width(L)                       last-significant position (0 = none)
/// + (last + 1)                         significance flags up to the last nonzero
/// + Σ_nonzero (2·⌊log2 |l|⌋ + 1) + 1   Exp-Golomb-0 of |l|−1 plus a sign bit
std::uint64_t rate_model(std::span<const std::int32_t> levels, unsigned signaling_bits);

/// D + λ·R.
double rd_cost(double distortion_sse, double rate_bits, double lambda);

/// DCT, ADST, DCT+ST, ADST+ST; also the RDO tie-break order.
enum class Candidate { kDct = 0, kAdst = 1, kDctSecondary = 2, kAdstSecondary = 3 };

struct TransformChoice {
  PrimaryKind primary = PrimaryKind::kDct;
  bool secondary_applied = false;
  unsigned signaling_bits = 1;

  Candidate candidate() const;
  bool operator==(const TransformChoice&) const = default;
};

/// One primary transform with its scan order and optional secondary kernel.
struct PrimaryBranch {
  PrimaryKernel primary;
  ScanOrder scan;
  std::optional<SecondaryKernel> secondary;
};

struct CandidateSet {
  std::array<PrimaryBranch, 2> branches;  // indexed by PrimaryKind

  static CandidateSet primary_only(std::size_t block_size, ScanOrder dct_scan, ScanOrder adst_scan);
  std::size_t block_size() const { return branches[0].primary.n; }
  const PrimaryBranch& branch(PrimaryKind k) const { return branches[static_cast<int>(k)]; }
  PrimaryBranch& branch(PrimaryKind k) { return branches[static_cast<int>(k)]; }
  bool has_secondary() const;
  /// 2 bits when any secondary candidate exists, 1 bit otherwise.
  unsigned signaling_bits() const { return has_secondary() ? 2 : 1; }
  /// Throws std::invalid_argument when sizes disagree.
  void validate() const;
};

struct BlockResult {
  TransformChoice choice;
  double rate_bits = 0.0;
  double distortion_sse = 0.0;
  double cost = 0.0;
  std::vector<std::int32_t> quantized_levels;
};

/// Codes `block` with one candidate: primary transform, scan, optional
/// secondary on the first n coefficients, quantization of everything
/// (secondary output followed by the tail), rate model, and the inverse
/// chain for a pixel-domain SSE. Throws std::invalid_argument if the
/// candidate needs a missing secondary kernel.
BlockResult encode_candidate(const DenseMatrix& block, const CandidateSet& candidates, Candidate c,
                             const QuantConfig& qc);

/// RD-optimal candidate among all available ones; ties resolve in
/// Candidate order.
BlockResult encode_block_rdo(const DenseMatrix& block, const CandidateSet& candidates, const QuantConfig& qc);

/// The n low-frequency primary coefficients of each block (one column per
/// listed block), i.e. the secondary transform's training input.
DenseMatrix lowfreq_samples(std::span<const DenseMatrix> blocks, const PrimaryBranch& branch,
                            std::span<const std::size_t> indices);
DenseMatrix lowfreq_samples(std::span<const DenseMatrix> blocks, const PrimaryBranch& branch);

/// Trains a secondary kernel for one primary on samples X̂ (n×m). `previous`
/// is the kernel to warm-start from, if any.
using SecondaryTrainer = std::function<SecondaryKernel(PrimaryKind primary, const DenseMatrix& x_hat,
                                                       const QuantConfig& qc,
                                                       const std::optional<SecondaryKernel>& previous)>;

struct ClusterResult {
  CandidateSet candidates;              // kernels after the last retrain
  std::vector<Candidate> assignment;    // per block, from the last assignment step
  std::array<std::vector<std::size_t>, 4> subsets;  // block indices per candidate
  std::vector<double> cost_trace;       // total RD cost per assignment step
};

/// Alternates per-block RDO assignment and retraining of each secondary
/// kernel on the blocks that chose it. A secondary with fewer than two
/// assigned blocks keeps its kernel.
ClusterResult rdo_cluster(std::span<const DenseMatrix> blocks, CandidateSet candidates, const QuantConfig& qc,
                          int iterations, const SecondaryTrainer& retrain);

struct AnnealResult {
  CandidateSet candidates;  // final stage
  std::vector<int> stage_qps;
  std::vector<std::vector<double>> stage_cost_traces;
  std::array<std::vector<std::size_t>, 4> subsets;  // final clustering
};

/// Trains secondary kernels over a QP list from largest to smallest μ, each
/// stage warm-started from the previous kernels and trained on the previous
/// stage's clusters (all blocks for the first stage). `cluster_iterations`
/// = 0 trains every stage on all blocks without clustering.
AnnealResult anneal_train(std::span<const DenseMatrix> blocks, const CandidateSet& base, std::vector<int> qps,
                          const SecondaryTrainer& trainer, int cluster_iterations,
                          const QuantOverrides& overrides = {});

}  // namespace fasst
