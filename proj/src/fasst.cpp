#include "fasst/fasst.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fasst {

FasstKernel FasstKernel::identity(std::size_t n) {
  FasstKernel k;
  k.n = n;
  return k;
}

void FasstKernel::validate() const {
  if (left.size() != right.size()) throw std::invalid_argument("FasstKernel: left/right lengths differ");
  if (n > 0 && left.size() > n * (n - 1) / 2) throw std::invalid_argument("FasstKernel: too many rotations");
  PairSet seen(n);
  for (std::size_t j = 0; j < left.size(); ++j) {
    const auto& l = left[j];
    const auto& r = right[j];
    if (l.p != r.p || l.q != r.q) throw std::invalid_argument("FasstKernel: pair sequences differ");
    if (l.p >= n || l.q >= n || l.p == l.q) throw std::invalid_argument("FasstKernel: invalid pair");
    if (!std::isfinite(l.angle) || !std::isfinite(r.angle)) {
      throw std::invalid_argument("FasstKernel: non-finite angle");
    }
    if (seen.contains(l.p, l.q)) throw std::invalid_argument("FasstKernel: repeated pair");
    seen.insert(l.p, l.q);
  }
}

DenseMatrix cross_covariance(const DenseMatrix& y, const DenseMatrix& x) {
  if (y.rows() != x.rows() || y.cols() != x.cols()) {
    throw std::invalid_argument("cross_covariance: dimension mismatch");
  }
  return multiply_abt(y, x);
}

// ---------------------------------------------------------------------------

void PairSet::insert(std::size_t p, std::size_t q) {
  if (p >= n_ || q >= n_ || p == q) throw std::out_of_range("PairSet: invalid pair");
  const std::size_t hi = std::max(p, q), lo = std::min(p, q);
  char& slot = used_[hi * n_ + lo];
  if (!slot) {
    slot = 1;
    ++count_;
  }
}

bool PairSet::contains(std::size_t p, std::size_t q) const {
  if (p >= n_ || q >= n_ || p == q) return false;
  return used_[std::max(p, q) * n_ + std::min(p, q)] != 0;
}

namespace {

// Pivot search on a precomputed Gram matrix ΓᵀΓ.
std::pair<std::size_t, std::size_t> pivot_from_gram(const DenseMatrix& gram, const PairSet& used) {
  const std::size_t n = gram.rows();
  bool found = false;
  std::size_t bp = 0, bq = 0;
  double best = -1.0;
  for (std::size_t p = 1; p < n; ++p) {
    for (std::size_t q = 0; q < p; ++q) {
      if (used.contains(p, q)) continue;
      const double v = std::abs(gram(p, q));
      if (v > best) {
        best = v;
        bp = p;
        bq = q;
        found = true;
      }
    }
  }
  if (!found) throw std::runtime_error("select_pivot: every index pair is already used");
  return {bp, bq};
}

double diagonal_energy(const DenseMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i) * m(i, i);
  return s;
}

}  // namespace

std::pair<std::size_t, std::size_t> select_pivot(const DenseMatrix& gamma_j, const PairSet& used) {
  if (!gamma_j.square() || gamma_j.rows() != used.dimension()) {
    throw std::invalid_argument("select_pivot: dimension mismatch");
  }
  return pivot_from_gram(gamma_j.transposed() * gamma_j, used);
}

double factorization_error(const DenseMatrix& u, const DenseMatrix& v, const DenseMatrix& gamma) {
  const double total = gamma.frobenius_norm_squared();
  if (total == 0.0) throw std::invalid_argument("factorization_error: gamma is zero");
  const DenseMatrix rotated = u.transposed() * gamma * v;
  return rotated.off_diagonal_energy() / total;
}

FasstKernel factorize_approx(const DenseMatrix& gamma, double tau, std::size_t j_max,
                             std::vector<double>* error_trace) {
  if (!gamma.square()) throw std::invalid_argument("factorize_approx: gamma must be square");
  if (!gamma.all_finite()) throw std::invalid_argument("factorize_approx: non-finite gamma");
  if (!(tau >= 0.0)) throw std::invalid_argument("factorize_approx: tau must be nonnegative");
  const std::size_t n = gamma.rows();
  const std::size_t pairs = n * (n - 1) / 2;
  if (j_max < 1 || j_max > pairs) throw std::invalid_argument("factorize_approx: J_max out of range");
  if (error_trace) error_trace->clear();

  FasstKernel kernel = FasstKernel::identity(n);
  kernel.tau = tau;
  const double total = gamma.frobenius_norm_squared();
  if (total == 0.0) return kernel;

  // g tracks Γ_j = U_jᵀΓV_j, gram tracks Γ_jᵀΓ_j (left rotations cancel in it).
  DenseMatrix g = gamma;
  DenseMatrix gram = gamma.transposed() * gamma;
  DenseMatrix u = DenseMatrix::identity(n);
  DenseMatrix v = DenseMatrix::identity(n);
  double diag = diagonal_energy(g);
  PairSet used(n);
  double e = 0.0;

  do {
    const auto [p, q] = pivot_from_gram(gram, used);
    used.insert(p, q);
    // Block in (q, p) order with q < p; angles for G(q, p, θ) equal those
    // for G(p, q, −θ). Solving in ascending order keeps the larger singular
    // value on the earlier index.
    const double a = g(q, q), b = g(q, p), c = g(p, q), d = g(p, p);
    double alpha = 0.0, beta = 0.0;
    if (std::abs(b) + std::abs(c) > DBL_EPSILON * (std::abs(a) + std::abs(d))) {
      const Svd2x2 s = svd_2x2(a, b, c, d);
      alpha = -s.alpha;
      beta = -s.beta;
    }
    const GivensRotation left{p, q, alpha};
    const GivensRotation right{p, q, beta};
    kernel.left.push_back(left);
    kernel.right.push_back(right);

    const double before = g(q, q) * g(q, q) + g(p, p) * g(p, p);
    apply_givens_left(g, left.inverse());  // G(α)ᵀ·Γ
    apply_givens_right(g, right);          // ·G(β)
    apply_givens_left(gram, right.inverse());
    apply_givens_right(gram, right);
    apply_givens_right(u, left);
    apply_givens_right(v, right);
    diag += g(q, q) * g(q, q) + g(p, p) * g(p, p) - before;

    const std::size_t j = kernel.left.size();
    if (j % 32 == 0) {
      const DenseMatrix fresh = u.transposed() * gamma * v;
      const double drift = max_abs_difference(fresh, g);
      if (drift > 1e-10 * std::sqrt(total)) {
        throw std::logic_error("factorize_approx: incremental state drifted by " + std::to_string(drift));
      }
      g = fresh;
      gram = g.transposed() * g;
      diag = diagonal_energy(g);
    }
    e = std::max(0.0, (total - diag) / total);
    if (error_trace) error_trace->push_back(e);
  } while (e > tau && kernel.left.size() < j_max && used.size() < pairs);

  kernel.e_final = e;
  return kernel;
}

// ---------------------------------------------------------------------------

void apply_fasst_in_place(const FasstKernel& kernel, std::span<double> x, bool inverse) {
  if (x.size() != kernel.n) throw std::invalid_argument("apply_fasst: length mismatch");
  const std::size_t j = kernel.left.size();
  // Sᵀ = U·Vᵀ and S = V·Uᵀ; the transposed factor runs first, in order.
  const auto& first = inverse ? kernel.left : kernel.right;
  const auto& second = inverse ? kernel.right : kernel.left;
  for (std::size_t i = 0; i < j; ++i) apply_givens_in_place(x, first[i].inverse());
  for (std::size_t i = j; i-- > 0;) apply_givens_in_place(x, second[i]);
}

std::vector<double> apply_fasst(const FasstKernel& kernel, std::span<const double> x, bool inverse) {
  std::vector<double> out(x.begin(), x.end());
  apply_fasst_in_place(kernel, out, inverse);
  return out;
}

DenseMatrix apply_fasst(const FasstKernel& kernel, const DenseMatrix& x, bool inverse) {
  if (x.rows() != kernel.n) throw std::invalid_argument("apply_fasst: dimension mismatch");
  // Rotations on a column stack are row rotations of the matrix.
  DenseMatrix out = x;
  const std::size_t j = kernel.left.size();
  const auto& first = inverse ? kernel.left : kernel.right;
  const auto& second = inverse ? kernel.right : kernel.left;
  for (std::size_t i = 0; i < j; ++i) apply_givens_left(out, first[i].inverse());
  for (std::size_t i = j; i-- > 0;) apply_givens_left(out, second[i]);
  return out;
}

DenseOrthonormal to_dense(const FasstKernel& kernel) {
  return DenseOrthonormal(apply_fasst(kernel, DenseMatrix::identity(kernel.n), true));
}

// ---------------------------------------------------------------------------

namespace {

// ‖X − S·Y‖² + mu·nnz(Y) with Y = HT(SᵀX), via ‖SᵀX − Y‖² (S orthonormal).
double objective_from_coeffs(const DenseMatrix& c, double mu, DenseMatrix* thresholded) {
  DenseMatrix y = hard_threshold(c, mu);
  double err = 0.0;
  std::size_t nnz = 0;
  const auto cv = c.values();
  const auto yv = y.values();
  for (std::size_t i = 0; i < cv.size(); ++i) {
    const double r = cv[i] - yv[i];
    err += r * r;
    nnz += yv[i] != 0.0;
  }
  if (thresholded) *thresholded = std::move(y);
  return err + mu * static_cast<double>(nnz);
}

}  // namespace

double fasst_objective(const FasstKernel& kernel, const DenseMatrix& x, double mu) {
  return objective_from_coeffs(apply_fasst(kernel, x, false), mu, nullptr);
}

DenseOrthonormal align_to_identity(const DenseOrthonormal& f) {
  const std::size_t n = f.n();
  DenseMatrix out(n, n);
  std::vector<char> row_used(n, 0), col_used(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    double best = -1.0;
    std::size_t br = 0, bc = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (row_used[r]) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (!col_used[c] && std::abs(f(r, c)) > best) {
          best = std::abs(f(r, c));
          br = r;
          bc = c;
        }
      }
    }
    row_used[br] = col_used[bc] = 1;
    const double sign = f(br, bc) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out(r, br) = sign * f(r, bc);
  }
  return DenseOrthonormal(std::move(out));
}

FasstModel fasst_learn(const DenseMatrix& x, double mu, const FasstOptions& opts) {
  const std::size_t n = x.rows();
  if (n < 2) throw std::invalid_argument("fasst_learn: dimension must be at least 2");
  const std::size_t pairs = n * (n - 1) / 2;
  const std::size_t j_max = opts.j_max == 0 ? pairs : opts.j_max;
  if (opts.max_outer < 1) throw std::invalid_argument("fasst_learn: max_outer must be positive");

  FasstModel model;
  DenseMatrix y;
  double best = std::numeric_limits<double>::infinity();
  if (opts.initial_kernel) {
    const FasstKernel& k0 = *opts.initial_kernel;
    if (k0.n != n) throw std::invalid_argument("fasst_learn: initial kernel dimension mismatch");
    model.initial_objective = objective_from_coeffs(apply_fasst(k0, x, false), mu, &y);
    if (k0.rotation_count() <= j_max) {
      best = model.initial_objective;
      model.kernel = k0;
      model.kernel.mu = mu;
    }
  } else {
    const DenseOrthonormal init =
        align_to_identity(opts.initial_transform ? *opts.initial_transform : sot_learn(x, mu, opts.sot).f);
    if (init.n() != n) throw std::invalid_argument("fasst_learn: initial transform dimension mismatch");
    model.initial_objective = objective_from_coeffs(init.matrix().transposed() * x, mu, &y);
  }

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const DenseMatrix gamma = cross_covariance(y, x);
    FasstKernel kernel = factorize_approx(gamma, opts.tau, j_max);
    kernel.mu = mu;
    const double obj = objective_from_coeffs(apply_fasst(kernel, x, false), mu, &y);
    model.objective_trace.push_back(obj);
    model.rotation_trace.push_back(kernel.rotation_count());
    if (obj < best) {
      best = obj;
      model.kernel = std::move(kernel);
    }
    const std::size_t k = model.objective_trace.size();
    if (k >= 2) {
      const double prev = model.objective_trace[k - 2];
      if (std::abs(prev - obj) < opts.rel_tol * prev) break;
    }
    if (obj == 0.0) break;
  }
  return model;
}

}  // namespace fasst
