#include "fasst/linalg.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

namespace fasst {

namespace {

// rows p,q of m ← [[c, s], [−s, c]] · rows p,q
void rotate_rows(DenseMatrix& m, std::size_t p, std::size_t q, double c, double s) {
  auto rp = m.row(p);
  auto rq = m.row(q);
  for (std::size_t k = 0; k < m.cols(); ++k) {
    const double x = rp[k];
    const double y = rq[k];
    rp[k] = c * x + s * y;
    rq[k] = -s * x + c * y;
  }
}

// columns p,q of m ← columns p,q · [[c, s], [−s, c]]
void rotate_cols(DenseMatrix& m, std::size_t p, std::size_t q, double c, double s) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double x = m(r, p);
    const double y = m(r, q);
    m(r, p) = c * x - s * y;
    m(r, q) = s * x + c * y;
  }
}

void check_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

// Column order that sorts `keys` descending; equal keys keep their index order.
std::vector<std::size_t> descending_order(const std::vector<double>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  return order;
}

DenseMatrix permute_columns(const DenseMatrix& m, const std::vector<std::size_t>& order) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < order.size(); ++c) out(r, c) = m(r, order[c]);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: entry count does not match shape");
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("DenseMatrix: ragged initializer");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  DenseMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

std::vector<double> DenseMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void DenseMatrix::set_column(std::size_t c, std::span<const double> v) {
  if (v.size() != rows_) throw std::invalid_argument("set_column: length mismatch");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double DenseMatrix::frobenius_norm_squared() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double DenseMatrix::frobenius_norm() const { return std::sqrt(frobenius_norm_squared()); }

double DenseMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double DenseMatrix::off_diagonal_energy() const {
  double s = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      if (r != c) s += (*this)(r, c) * (*this)(r, c);
    }
  }
  return s;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: inner dimension mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "matrix sum");
  DenseMatrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "matrix difference");
  DenseMatrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return out;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

std::vector<double> multiply(const DenseMatrix& m, std::span<const double> v) {
  if (v.size() != m.cols()) throw std::invalid_argument("matrix-vector product: length mismatch");
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * v[c];
    out[r] = s;
  }
  return out;
}

std::vector<double> multiply_transposed(const DenseMatrix& m, std::span<const double> v) {
  if (v.size() != m.rows()) throw std::invalid_argument("matrix-vector product: length mismatch");
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double vr = v[r];
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * vr;
  }
  return out;
}

DenseMatrix multiply_abt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("a·bᵀ: column count mismatch");
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto bj = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < ai.size(); ++k) s += ai[k] * bj[k];
      out(i, j) = s;
    }
  }
  return out;
}

double orthonormality_error(const DenseMatrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.cols(); ++i) {
    for (std::size_t j = i; j < m.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "max_abs_difference");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

// ---------------------------------------------------------------------------
// DenseOrthonormal

DenseOrthonormal::DenseOrthonormal(DenseMatrix m) : m_(std::move(m)) {
  if (!m_.square()) throw std::invalid_argument("DenseOrthonormal: matrix is not square");
  if (!m_.all_finite()) throw std::invalid_argument("DenseOrthonormal: non-finite entry");
  const double err = orthonormality_error(m_);
  if (err > kTolerance) {
    throw std::invalid_argument("DenseOrthonormal: ||FᵀF − I||max = " + std::to_string(err));
  }
}

DenseOrthonormal DenseOrthonormal::identity(std::size_t n) {
  return DenseOrthonormal(DenseMatrix::identity(n));
}

// ---------------------------------------------------------------------------
// Givens rotations

void apply_givens_in_place(std::span<double> v, const GivensRotation& g) {
  if (g.p >= v.size() || g.q >= v.size()) throw std::out_of_range("apply_givens: index out of range");
  const double c = std::cos(g.angle);
  const double s = std::sin(g.angle);
  const double x = v[g.p];
  const double y = v[g.q];
  v[g.p] = c * x + s * y;
  v[g.q] = -s * x + c * y;
}

std::vector<double> apply_givens(std::span<const double> v, const GivensRotation& g) {
  std::vector<double> out(v.begin(), v.end());
  apply_givens_in_place(out, g);
  return out;
}

void apply_givens_left(DenseMatrix& m, const GivensRotation& g) {
  if (g.p >= m.rows() || g.q >= m.rows()) throw std::out_of_range("apply_givens_left: index out of range");
  rotate_rows(m, g.p, g.q, std::cos(g.angle), std::sin(g.angle));
}

void apply_givens_right(DenseMatrix& m, const GivensRotation& g) {
  if (g.p >= m.cols() || g.q >= m.cols()) throw std::out_of_range("apply_givens_right: index out of range");
  rotate_cols(m, g.p, g.q, std::cos(g.angle), std::sin(g.angle));
}

DenseMatrix givens_matrix(std::size_t n, const GivensRotation& g) {
  DenseMatrix m = DenseMatrix::identity(n);
  apply_givens_left(m, g);
  return m;
}

// ---------------------------------------------------------------------------
// 2×2 SVD
//
// With E = (a00 + a11)/2, F = (a00 − a11)/2, G = (a10 + a01)/2, H = (a10 − a01)/2
// the block factors as Rot(φ)·diag(Q + R, Q − R)·Rot(θ), Rot being the
// counter-clockwise rotation, Q = |(E, H)|, R = |(F, G)|, θ = (atan2(H,E) −
// atan2(G,F))/2 and φ = (atan2(H,E) + atan2(G,F))/2. Rot(x) = R(−x) in the
// convention used here, hence alpha = −φ and beta = θ.

Svd2x2 svd_2x2(double a00, double a01, double a10, double a11) {
  Svd2x2 out;
  if (a01 == 0.0 && a10 == 0.0 && a00 >= 0.0 && a00 >= std::abs(a11)) {
    out.d1 = a00;
    out.d2 = a11;
    return out;
  }
  const double e = 0.5 * (a00 + a11);
  const double f = 0.5 * (a00 - a11);
  const double g = 0.5 * (a10 + a01);
  const double h = 0.5 * (a10 - a01);
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  const double t1 = (f == 0.0 && g == 0.0) ? 0.0 : std::atan2(g, f);
  const double t2 = (e == 0.0 && h == 0.0) ? 0.0 : std::atan2(h, e);
  out.alpha = -0.5 * (t2 + t1);
  out.beta = 0.5 * (t2 - t1);
  out.d1 = q + r;
  out.d2 = q - r;
  return out;
}

Svd2x2 svd_2x2(const DenseMatrix& a) {
  if (a.rows() != 2 || a.cols() != 2) throw std::invalid_argument("svd_2x2: expected a 2×2 matrix");
  return svd_2x2(a(0, 0), a(0, 1), a(1, 0), a(1, 1));
}

// ---------------------------------------------------------------------------
// Jacobi SVD

SvdResult jacobi_svd(const DenseMatrix& m, const JacobiOptions& opts) {
  if (!m.square()) throw std::invalid_argument("jacobi_svd: matrix must be square");
  if (!m.all_finite()) throw std::invalid_argument("jacobi_svd: non-finite entry");
  const std::size_t n = m.rows();
  DenseMatrix a = m;
  DenseMatrix u = DenseMatrix::identity(n);
  DenseMatrix v = DenseMatrix::identity(n);
  const double target = opts.tol * m.frobenius_norm();

  int sweep = 0;
  bool converged = false;
  for (; sweep <= opts.max_sweeps; ++sweep) {
    if (std::sqrt(a.off_diagonal_energy()) <= target) {
      converged = true;
      break;
    }
    if (sweep == opts.max_sweeps) break;
    std::size_t rotations = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double app = a(p, p), apq = a(p, q), aqp = a(q, p), aqq = a(q, q);
        const double off = std::abs(apq) + std::abs(aqp);
        if (off == 0.0 || off <= 0.5 * DBL_EPSILON * (std::abs(app) + std::abs(aqq))) continue;
        const Svd2x2 s = svd_2x2(app, apq, aqp, aqq);
        const double ca = std::cos(s.alpha), sa = std::sin(s.alpha);
        const double cb = std::cos(s.beta), sb = std::sin(s.beta);
        rotate_rows(a, p, q, ca, -sa);  // G(α)ᵀ·a
        rotate_cols(a, p, q, cb, sb);   // ·G(β)
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        rotate_cols(u, p, q, ca, sa);
        rotate_cols(v, p, q, cb, sb);
        ++rotations;
      }
    }
    if (rotations == 0) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("jacobi_svd: no convergence after " + std::to_string(opts.max_sweeps) +
                           " sweeps");
  }

  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i) {
    sv[i] = a(i, i);
    if (sv[i] < 0.0) {
      sv[i] = -sv[i];
      for (std::size_t r = 0; r < n; ++r) u(r, i) = -u(r, i);
    }
  }
  const auto order = descending_order(sv);
  SvdResult out;
  out.u = permute_columns(u, order);
  out.v = permute_columns(v, order);
  out.singular.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.singular[i] = sv[order[i]];
  out.sweeps = sweep;
  return out;
}

// ---------------------------------------------------------------------------
// Symmetric Jacobi eigensolver

EigenResult jacobi_eigh(const DenseMatrix& sym, const JacobiOptions& opts) {
  if (!sym.square()) throw std::invalid_argument("jacobi_eigh: matrix must be square");
  if (!sym.all_finite()) throw std::invalid_argument("jacobi_eigh: non-finite entry");
  const std::size_t n = sym.rows();
  DenseMatrix a = sym;
  // Work on the exactly symmetric part.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = s;
      a(j, i) = s;
    }
  }
  DenseMatrix vecs = DenseMatrix::identity(n);
  const double target = opts.tol * a.frobenius_norm();

  int sweep = 0;
  bool converged = false;
  for (; sweep <= opts.max_sweeps; ++sweep) {
    if (std::sqrt(a.off_diagonal_energy()) <= target) {
      converged = true;
      break;
    }
    if (sweep == opts.max_sweeps) break;
    std::size_t rotations = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double app = a(p, p), aqq = a(q, q);
        if (apq == 0.0 || std::abs(apq) <= 0.5 * DBL_EPSILON * std::sqrt(std::abs(app * aqq))) continue;
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        rotate_rows(a, p, q, c, -s);
        rotate_cols(a, p, q, c, s);
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        rotate_cols(vecs, p, q, c, s);
        ++rotations;
      }
    }
    if (rotations == 0) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("jacobi_eigh: no convergence after " + std::to_string(opts.max_sweeps) +
                           " sweeps");
  }

  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = a(i, i);
  const auto order = descending_order(vals);
  EigenResult out;
  out.vectors = permute_columns(vecs, order);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = vals[order[i]];
  out.sweeps = sweep;
  return out;
}

// ---------------------------------------------------------------------------

DenseOrthonormal procrustes(const DenseMatrix& gamma, const JacobiOptions& opts) {
  if (!gamma.square()) throw std::invalid_argument("procrustes: gamma must be square");
  const SvdResult svd = jacobi_svd(gamma, opts);
  return DenseOrthonormal(multiply_abt(svd.v, svd.u));
}

}  // namespace fasst
