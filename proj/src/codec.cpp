#include "fasst/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace fasst {

QuantConfig::QuantConfig(int qp, std::optional<double> lambda_override, std::optional<double> mu_override)
    : qp_(qp),
      q_step_(std::exp2((qp - 4) / 6.0)),
      lambda_(lambda_override.value_or(0.85 * std::exp2((qp - 12) / 3.0))),
      mu_(mu_override.value_or(q_step_ * q_step_ / 4.0)) {
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("QuantConfig: lambda must be nonnegative");
  if (!(mu_ >= 0.0)) throw std::invalid_argument("QuantConfig: mu must be nonnegative");
}

std::vector<std::int32_t> quantize(std::span<const double> coeffs, double q_step) {
  if (!(q_step > 0.0)) throw std::invalid_argument("quantize: q_step must be positive");
  std::vector<std::int32_t> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double l = std::round(coeffs[i] / q_step);  // halves away from zero
    if (!(std::abs(l) < 2147483647.0)) throw std::overflow_error("quantize: level out of range");
    out[i] = static_cast<std::int32_t>(l);
  }
  return out;
}

std::vector<double> dequantize(std::span<const std::int32_t> levels, double q_step) {
  std::vector<double> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) out[i] = levels[i] * q_step;
  return out;
}

std::uint64_t rate_model(std::span<const std::int32_t> levels, unsigned signaling_bits) {
  std::uint64_t bits = signaling_bits + std::bit_width(levels.size());
  std::size_t last = levels.size();
  for (std::size_t i = levels.size(); i-- > 0;) {
    if (levels[i] != 0) {
      last = i;
      break;
    }
  }
  if (last == levels.size()) return bits;
  bits += last + 1;
  for (std::size_t i = 0; i <= last; ++i) {
    if (levels[i] == 0) continue;
    const std::uint64_t mag = static_cast<std::uint64_t>(std::abs(static_cast<std::int64_t>(levels[i])));
    bits += 2 * (std::bit_width(mag) - 1) + 1 + 1;
  }
  return bits;
}

double rd_cost(double distortion_sse, double rate_bits, double lambda) { return distortion_sse + lambda * rate_bits; }

Candidate TransformChoice::candidate() const {
  const int base = primary == PrimaryKind::kDct ? 0 : 1;
  return static_cast<Candidate>(base + (secondary_applied ? 2 : 0));
}

// ---------------------------------------------------------------------------

CandidateSet CandidateSet::primary_only(std::size_t block_size, ScanOrder dct_scan, ScanOrder adst_scan) {
  CandidateSet s{{PrimaryBranch{PrimaryKernel::make(PrimaryKind::kDct, block_size), std::move(dct_scan), {}},
                  PrimaryBranch{PrimaryKernel::make(PrimaryKind::kAdst, block_size), std::move(adst_scan), {}}}};
  s.validate();
  return s;
}

bool CandidateSet::has_secondary() const {
  return branches[0].secondary.has_value() || branches[1].secondary.has_value();
}

void CandidateSet::validate() const {
  for (const auto& b : branches) {
    if (b.scan.block_size != b.primary.n || !b.scan.valid()) {
      throw std::invalid_argument("CandidateSet: scan order does not match block size");
    }
    if (b.secondary && b.secondary->input_size() != b.scan.n_selected) {
      throw std::invalid_argument("CandidateSet: secondary kernel size does not match scan selection");
    }
  }
  if (branches[0].primary.n != branches[1].primary.n) {
    throw std::invalid_argument("CandidateSet: primary kernels differ in size");
  }
  if (branches[0].primary.kind != PrimaryKind::kDct || branches[1].primary.kind != PrimaryKind::kAdst) {
    throw std::invalid_argument("CandidateSet: branches must be DCT then ADST");
  }
}

namespace {

BlockResult encode_from_coeffs(const DenseMatrix& block, const DenseMatrix& coeffs, const PrimaryBranch& branch,
                               bool use_secondary, unsigned signaling, const QuantConfig& qc) {
  const ScanOrder& scan = branch.scan;
  std::vector<double> coded;
  std::size_t head_len = 0;
  if (use_secondary) {
    const LowFreqSplit split = extract_lowfreq(coeffs, scan);
    coded = branch.secondary->forward(split.head);
    head_len = coded.size();
    coded.insert(coded.end(), split.tail.begin(), split.tail.end());
  } else {
    coded = scan_coefficients(coeffs, scan);
  }

  BlockResult r;
  r.choice = {branch.primary.kind, use_secondary, signaling};
  r.quantized_levels = quantize(coded, qc.q_step());
  r.rate_bits = static_cast<double>(rate_model(r.quantized_levels, signaling));

  const std::vector<double> deq = dequantize(r.quantized_levels, qc.q_step());
  DenseMatrix rec_coeffs;
  if (use_secondary) {
    const std::span<const double> all(deq);
    const std::vector<double> head = branch.secondary->inverse(all.first(head_len));
    rec_coeffs = reinsert_lowfreq(head, all.subspan(head_len), scan);
  } else {
    const std::span<const double> all(deq);
    rec_coeffs = reinsert_lowfreq(all.first(scan.n_selected), all.subspan(scan.n_selected), scan);
  }
  const DenseMatrix rec = apply_primary(rec_coeffs, branch.primary, true);
  double sse = 0.0;
  const auto a = block.values();
  const auto b = rec.values();
  for (std::size_t i = 0; i < a.size(); ++i) sse += (a[i] - b[i]) * (a[i] - b[i]);
  r.distortion_sse = sse;
  r.cost = rd_cost(sse, r.rate_bits, qc.lambda());
  return r;
}

}  // namespace

BlockResult encode_candidate(const DenseMatrix& block, const CandidateSet& candidates, Candidate c,
                             const QuantConfig& qc) {
  if (block.rows() != candidates.block_size() || block.cols() != candidates.block_size()) {
    throw std::invalid_argument("encode_candidate: block size does not match candidates");
  }
  const int id = static_cast<int>(c);
  const PrimaryBranch& branch = candidates.branches[id % 2];
  const bool use_secondary = id >= 2;
  if (use_secondary && !branch.secondary) throw std::invalid_argument("encode_candidate: no secondary kernel");
  const DenseMatrix coeffs = apply_primary(block, branch.primary, false);
  return encode_from_coeffs(block, coeffs, branch, use_secondary, candidates.signaling_bits(), qc);
}

BlockResult encode_block_rdo(const DenseMatrix& block, const CandidateSet& candidates, const QuantConfig& qc) {
  if (block.rows() != candidates.block_size() || block.cols() != candidates.block_size()) {
    throw std::invalid_argument("encode_block_rdo: block size does not match candidates");
  }
  const unsigned signaling = candidates.signaling_bits();
  std::array<DenseMatrix, 2> coeffs;
  for (int k = 0; k < 2; ++k) coeffs[k] = apply_primary(block, candidates.branches[k].primary, false);

  std::optional<BlockResult> best;
  for (int id = 0; id < 4; ++id) {
    const PrimaryBranch& branch = candidates.branches[id % 2];
    const bool use_secondary = id >= 2;
    if (use_secondary && !branch.secondary) continue;
    BlockResult r = encode_from_coeffs(block, coeffs[id % 2], branch, use_secondary, signaling, qc);
    if (!best || r.cost < best->cost) best = std::move(r);
  }
  return *best;
}

DenseMatrix lowfreq_samples(std::span<const DenseMatrix> blocks, const PrimaryBranch& branch,
                            std::span<const std::size_t> indices) {
  const std::size_t n = branch.scan.n_selected;
  DenseMatrix x(n, indices.size());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const DenseMatrix coeffs = apply_primary(blocks[indices[c]], branch.primary, false);
    const auto v = coeffs.values();
    for (std::size_t r = 0; r < n; ++r) x(r, c) = v[branch.scan.permutation[r]];
  }
  return x;
}

DenseMatrix lowfreq_samples(std::span<const DenseMatrix> blocks, const PrimaryBranch& branch) {
  std::vector<std::size_t> all(blocks.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return lowfreq_samples(blocks, branch, all);
}

// ---------------------------------------------------------------------------

namespace {

void assign(std::span<const DenseMatrix> blocks, const CandidateSet& candidates, const QuantConfig& qc,
            ClusterResult& out) {
  out.assignment.assign(blocks.size(), Candidate::kDct);
  for (auto& s : out.subsets) s.clear();
  double total = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const BlockResult r = encode_block_rdo(blocks[i], candidates, qc);
    const Candidate c = r.choice.candidate();
    out.assignment[i] = c;
    out.subsets[static_cast<int>(c)].push_back(i);
    total += r.cost;
  }
  out.cost_trace.push_back(total);
}

}  // namespace

ClusterResult rdo_cluster(std::span<const DenseMatrix> blocks, CandidateSet candidates, const QuantConfig& qc,
                          int iterations, const SecondaryTrainer& retrain) {
  if (iterations < 1) throw std::invalid_argument("rdo_cluster: iterations must be at least 1");
  candidates.validate();
  ClusterResult out{std::move(candidates), {}, {}, {}};
  for (int it = 0; it < iterations; ++it) {
    assign(blocks, out.candidates, qc, out);
    for (PrimaryKind kind : {PrimaryKind::kDct, PrimaryKind::kAdst}) {
      PrimaryBranch& branch = out.candidates.branch(kind);
      if (!branch.secondary) continue;
      const auto& subset = out.subsets[static_cast<int>(kind) + 2];
      if (subset.size() < 2) continue;
      branch.secondary = retrain(kind, lowfreq_samples(blocks, branch, subset), qc, branch.secondary);
    }
  }
  return out;
}

AnnealResult anneal_train(std::span<const DenseMatrix> blocks, const CandidateSet& base, std::vector<int> qps,
                          const SecondaryTrainer& trainer, int cluster_iterations,
                          const QuantOverrides& overrides) {
  if (qps.empty()) throw std::invalid_argument("anneal_train: empty QP list");
  if (cluster_iterations < 0) throw std::invalid_argument("anneal_train: negative cluster iterations");
  base.validate();
  // Largest μ (largest QP) first.
  std::stable_sort(qps.begin(), qps.end(), std::greater<>());

  AnnealResult out{base, {}, {}, {}};
  std::vector<std::size_t> all(blocks.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::array<std::vector<std::size_t>, 2> training{all, all};

  for (int qp : qps) {
    const QuantConfig qc(qp, overrides);
    for (PrimaryKind kind : {PrimaryKind::kDct, PrimaryKind::kAdst}) {
      PrimaryBranch& branch = out.candidates.branch(kind);
      const auto& subset = training[static_cast<int>(kind)];
      if (subset.size() < 2) continue;
      branch.secondary = trainer(kind, lowfreq_samples(blocks, branch, subset), qc, branch.secondary);
    }
    out.stage_qps.push_back(qp);
    if (cluster_iterations == 0) {
      out.stage_cost_traces.emplace_back();
      continue;
    }
    ClusterResult cr = rdo_cluster(blocks, out.candidates, qc, cluster_iterations, trainer);
    out.candidates = std::move(cr.candidates);
    out.stage_cost_traces.push_back(std::move(cr.cost_trace));
    out.subsets = cr.subsets;
    for (int k = 0; k < 2; ++k) training[k] = cr.subsets[k + 2];
  }
  return out;
}

}  // namespace fasst
