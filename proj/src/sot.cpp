#include "fasst/sot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fasst/baselines.hpp"

namespace fasst {

namespace {
void check_mu(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("sparsity parameter mu must be nonnegative");
}

DenseMatrix transform_coefficients(const DenseOrthonormal& f, const DenseMatrix& x) {
  return f.matrix().transposed() * x;
}
}  // namespace

std::vector<double> hard_threshold(std::span<const double> c, double mu) {
  check_mu(mu);
  const double t = std::sqrt(mu);
  std::vector<double> out(c.begin(), c.end());
  for (double& v : out) {
    if (!(std::abs(v) >= t)) v = 0.0;
  }
  return out;
}

DenseMatrix hard_threshold(const DenseMatrix& coeffs, double mu) {
  check_mu(mu);
  const double t = std::sqrt(mu);
  DenseMatrix out = coeffs;
  for (double& v : out.values()) {
    if (!(std::abs(v) >= t)) v = 0.0;
  }
  return out;
}

double sot_objective(const DenseMatrix& x, const DenseMatrix& f, const DenseMatrix& y, double mu) {
  if (f.rows() != x.rows() || f.cols() != y.rows() || x.cols() != y.cols()) {
    throw std::invalid_argument("sot_objective: dimension mismatch");
  }
  const DenseMatrix residual = x - f * y;
  std::size_t nnz = 0;
  for (double v : y.values()) nnz += v != 0.0;
  return residual.frobenius_norm_squared() + mu * static_cast<double>(nnz);
}

double sot_objective(const DenseMatrix& x, const DenseOrthonormal& f, double mu) {
  return sot_objective(x, f.matrix(), hard_threshold(transform_coefficients(f, x), mu), mu);
}

DenseOrthonormal order_by_energy(const DenseOrthonormal& f, const DenseMatrix& x) {
  const DenseMatrix c = transform_coefficients(f, x);
  std::vector<double> energy(c.rows(), 0.0);
  for (std::size_t r = 0; r < c.rows(); ++r) {
    for (double v : c.row(r)) energy[r] += v * v;
  }
  std::vector<std::size_t> order(energy.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energy[a] > energy[b]; });
  DenseMatrix out(f.n(), f.n());
  for (std::size_t r = 0; r < f.n(); ++r) {
    for (std::size_t k = 0; k < f.n(); ++k) out(r, k) = f(r, order[k]);
  }
  return DenseOrthonormal(std::move(out));
}

SotModel sot_learn(const DenseMatrix& x, double mu, const DenseOrthonormal& init, const SotOptions& opts) {
  check_mu(mu);
  if (init.n() != x.rows()) throw std::invalid_argument("sot_learn: init dimension does not match samples");
  SotModel model{init, mu, {}, {}};
  if (x.cols() < x.rows()) {
    model.warnings.push_back("fewer training samples (" + std::to_string(x.cols()) + ") than dimensions (" +
                             std::to_string(x.rows()) + ")");
  }

  DenseOrthonormal f = init;
  for (int it = 0;; ++it) {
    const DenseMatrix y = hard_threshold(transform_coefficients(f, x), mu);
    const double obj = sot_objective(x, f.matrix(), y, mu);
    // Both half-steps are exact minimizers, so an increase can only come from
    // SVD round-off at convergence; keep the previous transform then.
    if (!model.objective_trace.empty() && obj > model.objective_trace.back()) break;
    model.f = f;
    model.objective_trace.push_back(obj);
    const std::size_t k = model.objective_trace.size();
    if (k >= 2) {
      const double prev = model.objective_trace[k - 2];
      if (prev - obj <= opts.eps * prev) break;
    }
    if (obj == 0.0 || it >= opts.max_iter) break;
    f = procrustes(multiply_abt(y, x), opts.svd);
  }
  model.f = order_by_energy(model.f, x);
  return model;
}

SotModel sot_learn(const DenseMatrix& x, double mu, const SotOptions& opts) {
  return sot_learn(x, mu, klt_learn(x), opts);
}

}  // namespace fasst
