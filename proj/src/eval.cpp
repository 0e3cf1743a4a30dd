#include "fasst/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fasst {

double psnr_db(double sse, std::size_t pixels) {
  if (sse <= 0.0) return kPsnrCeiling;
  return std::min(kPsnrCeiling, 10.0 * std::log10(kPsnrPeak * kPsnrPeak * static_cast<double>(pixels) / sse));
}

RdTotals encode_all(std::span<const EvalGroup> groups, const QuantConfig& qc) {
  RdTotals t;
  for (const auto& g : groups) {
    if (!g.candidates) throw std::invalid_argument("encode_all: group without candidates");
    for (const auto& b : g.blocks) {
      const BlockResult r = encode_block_rdo(b, *g.candidates, qc);
      t.bits += static_cast<std::uint64_t>(r.rate_bits);
      t.sse += r.distortion_sse;
      t.pixels += b.rows() * b.cols();
      ++t.blocks;
      ++t.choices[static_cast<int>(r.choice.candidate())];
    }
  }
  return t;
}

RdPoint rd_point(int qp, const RdTotals& totals) {
  if (totals.blocks == 0) throw std::invalid_argument("rd_point: no blocks");
  return {qp, static_cast<double>(totals.bits) / static_cast<double>(totals.blocks), psnr_db(totals.sse, totals.pixels),
          totals.sse};
}

RdCurve build_rd_curve(std::string label, std::span<const EvalGroup> groups, std::span<const int> qps,
                       const QuantOverrides& overrides) {
  if (qps.size() < 4) throw std::invalid_argument("build_rd_curve: need at least 4 QPs");
  RdCurve c{std::move(label), {}};
  for (int qp : qps) c.points.push_back(rd_point(qp, encode_all(groups, QuantConfig(qp, overrides))));
  std::stable_sort(c.points.begin(), c.points.end(),
                   [](const RdPoint& a, const RdPoint& b) { return a.rate_bits < b.rate_bits; });
  return c;
}

// ---------------------------------------------------------------------------
// BD-rate

namespace {

struct Samples {
  std::vector<double> psnr;  // ascending
  std::vector<double> log_rate;
};

Samples prepare(const RdCurve& c, const char* which) {
  if (c.points.size() < 4) throw std::invalid_argument(std::string("bd_rate: ") + which + " curve needs 4 points");
  std::vector<RdPoint> pts = c.points;
  std::stable_sort(pts.begin(), pts.end(), [](const RdPoint& a, const RdPoint& b) { return a.psnr_db < b.psnr_db; });
  Samples s;
  for (const auto& p : pts) {
    if (!(p.rate_bits > 0.0) || !std::isfinite(p.psnr_db)) {
      throw std::invalid_argument(std::string("bd_rate: ") + which + " curve has a non-positive rate");
    }
    if (!s.psnr.empty() && p.psnr_db <= s.psnr.back()) {
      throw std::invalid_argument(std::string("bd_rate: ") + which + " curve repeats a PSNR value");
    }
    s.psnr.push_back(p.psnr_db);
    s.log_rate.push_back(std::log(p.rate_bits));
  }
  return s;
}

// Least-squares cubic in a centered/scaled variable t = (x − c)/h; returns
// coefficients a0..a3. Solved through the 4×4 normal equations.
struct Cubic {
  double c = 0.0, h = 1.0;
  std::array<double, 4> a{};
  double operator()(double x) const {
    const double t = (x - c) / h;
    return ((a[3] * t + a[2]) * t + a[1]) * t + a[0];
  }
};

Cubic fit_cubic(const Samples& s) {
  Cubic f;
  f.c = 0.5 * (s.psnr.front() + s.psnr.back());
  f.h = std::max(0.5 * (s.psnr.back() - s.psnr.front()), 1e-12);
  std::array<std::array<double, 5>, 4> m{};
  for (std::size_t i = 0; i < s.psnr.size(); ++i) {
    const double t = (s.psnr[i] - f.c) / f.h;
    const std::array<double, 4> pw{1.0, t, t * t, t * t * t};
    for (int r = 0; r < 4; ++r) {
      for (int k = 0; k < 4; ++k) m[r][k] += pw[r] * pw[k];
      m[r][4] += pw[r] * s.log_rate[i];
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-300) throw std::invalid_argument("bd_rate: degenerate curve");
    std::swap(m[col], m[piv]);
    for (int r = col + 1; r < 4; ++r) {
      const double k = m[r][col] / m[col][col];
      for (int c = col; c < 5; ++c) m[r][c] -= k * m[col][c];
    }
  }
  for (int r = 3; r >= 0; --r) {
    double v = m[r][4];
    for (int c = r + 1; c < 4; ++c) v -= m[r][c] * f.a[c];
    f.a[r] = v / m[r][r];
  }
  return f;
}

// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
struct Pchip {
  std::vector<double> x, y, d;
  double operator()(double v) const {
    std::size_t k = std::upper_bound(x.begin(), x.end(), v) - x.begin();
    k = std::clamp<std::size_t>(k, 1, x.size() - 1) - 1;
    const double h = x[k + 1] - x[k];
    const double t = (v - x[k]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * y[k] + h10 * h * d[k] + h01 * y[k + 1] + h11 * h * d[k + 1];
  }
};

Pchip fit_pchip(const Samples& s) {
  Pchip p{s.psnr, s.log_rate, std::vector<double>(s.psnr.size(), 0.0)};
  const std::size_t n = p.x.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = p.x[k + 1] - p.x[k];
    delta[k] = (p.y[k + 1] - p.y[k]) / h[k];
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k - 1] * delta[k] <= 0.0) continue;
    const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
    p.d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(d) > std::abs(3 * d0)) return 3 * d0;
    return d;
  };
  p.d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  p.d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return p;
}

// Simpson's rule is exact for cubics; apply it per knot interval.
template <class F>
double integrate(const F& f, std::vector<double> knots, double lo, double hi) {
  knots.push_back(lo);
  knots.push_back(hi);
  std::sort(knots.begin(), knots.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = std::max(lo, knots[i]), b = std::min(hi, knots[i + 1]);
    if (b <= a) continue;
    s += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
  }
  return s;
}

}  // namespace

double bd_rate(const RdCurve& test, const RdCurve& anchor, BdVariant variant) {
  const Samples t = prepare(test, "test");
  const Samples a = prepare(anchor, "anchor");
  const double lo = std::max(t.psnr.front(), a.psnr.front());
  const double hi = std::min(t.psnr.back(), a.psnr.back());
  if (!(hi > lo)) throw std::invalid_argument("bd_rate: PSNR ranges do not overlap");
  double it = 0.0, ia = 0.0;
  if (variant == BdVariant::kCubic) {
    it = integrate(fit_cubic(t), {}, lo, hi);
    ia = integrate(fit_cubic(a), {}, lo, hi);
  } else {
    it = integrate(fit_pchip(t), t.psnr, lo, hi);
    ia = integrate(fit_pchip(a), a.psnr, lo, hi);
  }
  return (std::exp((it - ia) / (hi - lo)) - 1.0) * 100.0;
}

// ---------------------------------------------------------------------------

namespace {
ComplexityReport report(std::string method, std::size_t n, double mults, double adds) {
  if (n == 0) throw std::invalid_argument("complexity: n must be positive");
  return {std::move(method), n, mults, adds, mults / static_cast<double>(n * n), std::nullopt, std::nullopt};
}
}  // namespace

ComplexityReport complexity_klt(std::size_t n) {
  return report("klt", n, static_cast<double>(n * n), static_cast<double>(n * (n - 1)));
}

ComplexityReport complexity_lfnst(std::size_t n, std::size_t n_k) {
  if (n_k == 0 || n_k > n) throw std::invalid_argument("complexity_lfnst: n_k out of range");
  return report("lfnst", n, static_cast<double>(n_k * n), static_cast<double>(n_k * (n - 1)));
}

ComplexityReport complexity_fasst(std::size_t n, std::size_t j) {
  ComplexityReport r = report("fasst", n, 4.0 * j, 2.0 * j);
  r.actual_multiplications = 8.0 * j;
  r.actual_additions = 4.0 * j;
  return r;
}

ComplexityReport complexity_fasst_adaptive(std::size_t n, std::span<const std::size_t> j_per_mode) {
  if (j_per_mode.empty()) throw std::invalid_argument("complexity_fasst_adaptive: no modes");
  const double mean =
      static_cast<double>(std::accumulate(j_per_mode.begin(), j_per_mode.end(), std::size_t{0})) / j_per_mode.size();
  ComplexityReport r = report("fasst-adaptive", n, 4.0 * mean, 2.0 * mean);
  r.actual_multiplications = 8.0 * mean;
  r.actual_additions = 4.0 * mean;
  return r;
}

// ---------------------------------------------------------------------------

CorrelationSummary correlation_inspect(const DenseMatrix& x, const SecondaryKernel* kernel) {
  if (x.cols() < 2) throw std::invalid_argument("correlation_inspect: need at least 2 samples");
  DenseMatrix c = x;
  if (kernel) {
    if (kernel->input_size() != x.rows()) throw std::invalid_argument("correlation_inspect: kernel size mismatch");
    c = DenseMatrix(kernel->output_size(), x.cols());
    for (std::size_t s = 0; s < x.cols(); ++s) c.set_column(s, kernel->forward(x.column(s)));
  }
  const std::size_t n = c.rows(), m = c.cols();
  for (std::size_t r = 0; r < n; ++r) {
    auto row = c.row(r);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(m);
    for (double& v : row) v -= mean;
  }
  const DenseMatrix cov = multiply_abt(c, c);
  CorrelationSummary out{DenseMatrix(n, n), 0.0, 0.0, {}};
  for (std::size_t i = 0; i < n; ++i)
    if (!(cov(i, i) > 0.0)) out.zero_variance.push_back(i);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = cov(i, i) * cov(j, j);
      const double v = d > 0.0 ? cov(i, j) / std::sqrt(d) : 0.0;
      out.correlation(i, j) = v;
      (i == j ? out.diagonal_energy : out.off_diagonal_energy) += v * v;
    }
  }
  return out;
}

}  // namespace fasst
