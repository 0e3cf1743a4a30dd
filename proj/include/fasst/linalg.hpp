#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fasst {

/// Raised when an iterative solver exhausts its sweep budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense real matrix, row-major.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> v);

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  DenseMatrix transposed() const;
  double frobenius_norm_squared() const;
  double frobenius_norm() const;
  double trace() const;
  /// Squared Frobenius norm of the off-diagonal part.
  double off_diagonal_energy() const;
  bool all_finite() const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);
std::vector<double> multiply(const DenseMatrix& m, std::span<const double> v);
/// mᵀ·v without materializing the transpose.
std::vector<double> multiply_transposed(const DenseMatrix& m, std::span<const double> v);
/// a·bᵀ, the shape used for cross-covariances of column-stacked samples.
DenseMatrix multiply_abt(const DenseMatrix& a, const DenseMatrix& b);

/// max |(mᵀm − I)_ij|.
double orthonormality_error(const DenseMatrix& m);
double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b);

/// Square matrix with FᵀF = I to 1e-9, checked at construction.
class DenseOrthonormal {
 public:
  static constexpr double kTolerance = 1e-9;

  /// Throws std::invalid_argument if `m` is not square or not orthonormal.
  explicit DenseOrthonormal(DenseMatrix m);
  static DenseOrthonormal identity(std::size_t n);

  std::size_t n() const { return m_.rows(); }
  const DenseMatrix& matrix() const { return m_; }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  /// F·v
  std::vector<double> apply(std::span<const double> v) const { return multiply(m_, v); }
  /// Fᵀ·v
  std::vector<double> apply_transposed(std::span<const double> v) const {
    return multiply_transposed(m_, v);
  }

 private:
  DenseMatrix m_;
};

/// Rotation acting on coordinates (p, q):
///   out_p =  cos·v_p + sin·v_q
///   out_q = −sin·v_p + cos·v_q
struct GivensRotation {
  std::size_t p = 0;
  std::size_t q = 1;
  double angle = 0.0;

  GivensRotation inverse() const { return {p, q, -angle}; }
  bool operator==(const GivensRotation&) const = default;
};

/// Rotates v in place. Performs exactly 4 multiplications and 2 additions.
void apply_givens_in_place(std::span<double> v, const GivensRotation& g);
std::vector<double> apply_givens(std::span<const double> v, const GivensRotation& g);

/// m ← G·m (mixes rows p and q).
void apply_givens_left(DenseMatrix& m, const GivensRotation& g);
/// m ← m·G (mixes columns p and q).
void apply_givens_right(DenseMatrix& m, const GivensRotation& g);
/// The n×n matrix of g.
DenseMatrix givens_matrix(std::size_t n, const GivensRotation& g);

/// Closed-form SVD of a 2×2 block a = [[a00, a01], [a10, a11]] expressed
/// with rotations R(θ) = [[cos θ, sin θ], [−sin θ, cos θ]]:
///   R(−alpha) · a · R(beta) = diag(d1, d2),  d1 ≥ |d2|.
/// d2 carries the sign of det(a); sigma = (|d1|, |d2|) are the singular values.
/// d1 + d2 is the largest trace reachable by a pair of rotations.
struct Svd2x2 {
  double alpha = 0.0;
  double beta = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double sigma1() const { return d1 < 0 ? -d1 : d1; }
  double sigma2() const { return d2 < 0 ? -d2 : d2; }
};
Svd2x2 svd_2x2(double a00, double a01, double a10, double a11);
Svd2x2 svd_2x2(const DenseMatrix& a);

struct SvdResult {
  DenseMatrix u;                 // columns are left singular vectors
  std::vector<double> singular;  // descending, nonnegative
  DenseMatrix v;                 // columns are right singular vectors
  int sweeps = 0;
};

struct JacobiOptions {
  double tol = 1e-13;
  int max_sweeps = 64;
};

/// Two-sided (Kogbetliantz) Jacobi SVD of a square matrix: m = U·diag(S)·Vᵀ.
/// Sweeps are cyclic by rows; converged once the off-diagonal Frobenius norm
/// is ≤ tol·‖m‖_F or a full sweep finds nothing left to rotate.
SvdResult jacobi_svd(const DenseMatrix& m, const JacobiOptions& opts = {});

struct EigenResult {
  std::vector<double> values;  // descending
  DenseMatrix vectors;         // column k pairs with values[k]
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
EigenResult jacobi_eigh(const DenseMatrix& sym, const JacobiOptions& opts = {});

/// Orthonormal F maximizing tr(gamma·F); F = V·Uᵀ where gamma = U·S·Vᵀ.
DenseOrthonormal procrustes(const DenseMatrix& gamma, const JacobiOptions& opts = {});

}  // namespace fasst
