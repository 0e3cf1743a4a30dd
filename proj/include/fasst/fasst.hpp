#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fasst/linalg.hpp"
#include "fasst/sot.hpp"

namespace fasst {

/// Secondary transform S = V·Uᵀ with
///   U = G(m_1, n_1, α_1)···G(m_J, n_J, α_J)   (left)
///   V = G(m_1, n_1, β_1)···G(m_J, n_J, β_J)   (right)
/// Both sequences share the index pairs, which never repeat.
struct FasstKernel {
  std::size_t n = 0;
  std::vector<GivensRotation> left;
  std::vector<GivensRotation> right;
  double e_final = 0.0;
  double mu = 0.0;
  double tau = 0.0;

  std::size_t rotation_count() const { return left.size(); }
  static FasstKernel identity(std::size_t n);
  /// Throws std::invalid_argument when a structural invariant is broken.
  void validate() const;
  bool operator==(const FasstKernel&) const = default;
};

/// Γ = Y·Xᵀ for column-stacked samples.
DenseMatrix cross_covariance(const DenseMatrix& y, const DenseMatrix& x);

/// Unordered index pairs already consumed by a factorization.
class PairSet {
 public:
  explicit PairSet(std::size_t n) : n_(n), used_(n * n, 0) {}
  void insert(std::size_t p, std::size_t q);
  bool contains(std::size_t p, std::size_t q) const;
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return n_ * (n_ - 1) / 2; }
  std::size_t dimension() const { return n_; }

 private:
  std::size_t n_;
  std::vector<char> used_;
  std::size_t count_ = 0;
};

/// (p, q) with p > q maximizing |[ΓᵀΓ]_pq| among unused pairs; ties go to the
/// lexicographically smallest (p, q). Throws std::runtime_error when every
/// pair is used.
std::pair<std::size_t, std::size_t> select_pivot(const DenseMatrix& gamma_j, const PairSet& used);

/// ‖offdiag(Uᵀ·Γ·V)‖²_F / ‖Γ‖²_F. Throws std::invalid_argument for Γ = 0.
double factorization_error(const DenseMatrix& u, const DenseMatrix& v, const DenseMatrix& gamma);

/// Greedy Givens approximation of the trace maximizer of tr(Γ·S).
/// Places at least one rotation, then continues while e_j > tau and
/// j < j_max, or until every pair is used. A zero Γ yields the identity
/// kernel. When `error_trace` is given it receives e_1, …, e_J.
FasstKernel factorize_approx(const DenseMatrix& gamma, double tau, std::size_t j_max,
                             std::vector<double>* error_trace = nullptr);

/// Sᵀ·x (forward) or S·x (inverse) through the rotation sequences.
std::vector<double> apply_fasst(const FasstKernel& kernel, std::span<const double> x, bool inverse);
void apply_fasst_in_place(const FasstKernel& kernel, std::span<double> x, bool inverse);
/// Column-wise Sᵀ·X or S·X.
DenseMatrix apply_fasst(const FasstKernel& kernel, const DenseMatrix& x, bool inverse);

/// S = V·Uᵀ as a dense matrix.
DenseOrthonormal to_dense(const FasstKernel& kernel);

struct FasstOptions {
  double tau = 1e-6;
  std::size_t j_max = 0;  // 0 means n(n−1)/2
  int max_outer = 50;
  double rel_tol = 1e-5;
  SotOptions sot{};
  /// Starting transform for the first thresholding step, aligned to the
  /// identity before use. Without it the learner runs SOT (KLT-initialized).
  std::optional<DenseOrthonormal> initial_transform{};
  /// Warm start from an existing rotation kernel (takes precedence over
  /// initial_transform). It competes for "best" if it fits the budget, so
  /// the result is never worse than the starting kernel.
  std::optional<FasstKernel> initial_kernel{};
};

struct FasstModel {
  FasstKernel kernel;  // best objective seen (including a fitting initial_kernel)
  double initial_objective = 0.0;
  std::vector<double> objective_trace;
  std::vector<std::size_t> rotation_trace;
};

/// f·P for the signed permutation P that greedily pairs each column with
/// the row of its largest remaining entry and makes that entry positive.
/// Sparse-coding costs are invariant under P, but the aligned matrix sits
/// much closer to the identity and so needs far fewer rotations.
DenseOrthonormal align_to_identity(const DenseOrthonormal& f);

/// Σ‖x_i − S·y_i‖² + mu·‖y_i‖₀ with y_i the thresholded Sᵀx_i.
double fasst_objective(const FasstKernel& kernel, const DenseMatrix& x, double mu);

/// Alternates thresholding of SᵀX and approximate Givens factorization of
/// Γ = Y·Xᵀ until the objective settles (relative change < rel_tol) or
/// max_outer rounds pass.
FasstModel fasst_learn(const DenseMatrix& x, double mu, const FasstOptions& opts);

}  // namespace fasst
