// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fasst/baselines.hpp"
#include "fasst/fasst.hpp"
#include "fasst/linalg.hpp"
#include "fasst/pipeline.hpp"
#include "fasst/sot.hpp"
#include "oracles.hpp"

using namespace fasst;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double max_abs(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a(r, c) - b(r, c)));
  return m;
}

double naive_orthonormality(const DenseMatrix& s) {
  return max_abs(oracle::naive_matmul(oracle::naive_transpose(s), s), DenseMatrix::identity(s.rows()));
}

// ---------------------------------------------------------------------------

Outcome exactness_oracles() {
  std::mt19937_64 rng(1001);
  int threshold_mismatch = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + t % 6;
    const DenseMatrix f = oracle::random_orthonormal(n, rng);
    const DenseMatrix x = oracle::random_matrix(n, 1, rng, -3, 3);
    const double mu = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
    const DenseMatrix y = hard_threshold(oracle::naive_matmul(oracle::naive_transpose(f), x), mu);
    double got = 0.0;
    const DenseMatrix r = oracle::naive_matmul(f, y);
    for (std::size_t i = 0; i < n; ++i) got += (x(i, 0) - r(i, 0)) * (x(i, 0) - r(i, 0)) + (y(i, 0) != 0.0 ? mu : 0.0);
    const double want = oracle::l0_brute_force(x.column(0), f, mu);
    threshold_mismatch += std::abs(got - want) > 1e-9 * (1.0 + want);
  }

  int procrustes_losses = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 2 + inst % 5;
    const DenseMatrix g = oracle::random_matrix(n, n, rng);
    const double best = oracle::trace_of_product(g, procrustes(g).matrix());
    for (int k = 0; k < 10000; ++k) {
      procrustes_losses += oracle::trace_of_product(g, oracle::random_orthonormal(n, rng)) > best + 1e-12;
    }
  }

  double worst_svd = 0.0;
  for (int t = 0; t < 100; ++t) {
    const DenseMatrix m = oracle::random_matrix(8, 8, rng);
    const SvdResult s = jacobi_svd(m);
    const DenseMatrix rec =
        oracle::naive_matmul(oracle::naive_matmul(s.u, DenseMatrix::diagonal(s.singular)), oracle::naive_transpose(s.v));
    worst_svd = std::max(worst_svd, max_abs(rec, m));
  }
  return {threshold_mismatch == 0 && procrustes_losses == 0 && worst_svd <= 1e-10,
          fmt("hard_threshold mismatches %.0f/500, procrustes losses %.0f/1e6, worst SVD error %.2e", threshold_mismatch,
              procrustes_losses, worst_svd)};
}

Outcome factorization_invariants() {
  std::mt19937_64 rng(2002);
  int trace_breaks = 0, reuse = 0;
  double worst_orth = 0.0, worst_apply = 0.0;
  for (int t = 0; t < 200; ++t) {
    DenseMatrix g = oracle::random_matrix(8, 8, rng);
    if (t % 2) g = multiply_abt(g, g) + DenseMatrix::identity(8);
    std::vector<double> trace;
    const FasstKernel k = factorize_approx(g, 0.0, 1 + t % 28, &trace);
    for (std::size_t j = 1; j < trace.size(); ++j) trace_breaks += trace[j] > trace[j - 1] + 1e-12;
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& r : k.left) pairs.insert({std::max(r.p, r.q), std::min(r.p, r.q)});
    reuse += pairs.size() != k.rotation_count();

    const DenseMatrix s = to_dense(k).matrix();
    worst_orth = std::max(worst_orth, naive_orthonormality(s));
    const DenseMatrix x = oracle::random_matrix(8, 4, rng);
    worst_apply = std::max(worst_apply, max_abs(apply_fasst(k, x, false), oracle::naive_matmul(oracle::naive_transpose(s), x)));
    worst_apply = std::max(worst_apply, max_abs(apply_fasst(k, x, true), oracle::naive_matmul(s, x)));
  }
  return {trace_breaks == 0 && reuse == 0 && worst_orth <= 1e-9 && worst_apply <= 1e-10,
          fmt("error increases %.0f, pair reuse %.0f, worst orthonormality %.2e, worst apply mismatch %.2e",
              trace_breaks, reuse, worst_orth, worst_apply)};
}

Outcome sot_monotonicity() {
  std::mt19937_64 rng(3003);
  int breaks = 0;
  std::size_t steps = 0;
  for (int run = 0; run < 50; ++run) {
    const std::size_t n = run % 2 ? 16 : 4;
    const int qp = 26 + run % 6;
    const DenseMatrix mix = oracle::gaussian_matrix(n, n, rng);
    const DenseMatrix x = 6.0 * oracle::naive_matmul(mix, oracle::gaussian_matrix(n, 40 * n, rng));
    const SotModel m = sot_learn(x, QuantConfig(qp).mu());
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i) {
      breaks += m.objective_trace[i] > m.objective_trace[i - 1] + 1e-9 * std::max(1.0, m.objective_trace[i - 1]);
      ++steps;
    }
  }
  return {breaks == 0, fmt("%.0f increases over %.0f iterations in 50 runs", breaks, static_cast<double>(steps))};
}

Outcome complexity_table() {
  const double expected[] = {11.1, 22.2, 33.3, 44.4, 66.7, 88.9};
  const std::size_t budgets[] = {64, 128, 192, 256, 384, 512};
  double worst = 0.0;
  std::string got;
  for (int i = 0; i < 6; ++i) {
    const double pct = 100.0 * complexity_fasst(48, budgets[i]).fraction_vs_klt;
    worst = std::max(worst, std::abs(pct - expected[i]));
    got += fmt(i ? ", %.2f" : "%.2f", pct);
  }
  const double lfnst = 100.0 * complexity_lfnst(48, 32).fraction_vs_klt;
  return {worst <= 0.05 && std::abs(lfnst - 66.67) <= 0.005,
          "fasst {" + got + "}%, lfnst " + fmt("%.2f%%", lfnst) + fmt(", worst deviation %.3f pp", worst)};
}

// ---------------------------------------------------------------------------

double pooled_bd(const std::vector<RdRow>& test, const std::vector<RdRow>& anchor) {
  for (const auto& r : bd_rate_rows(test, anchor, BdVariant::kCubic))
    if (r.group == "all") return r.percent;
  throw std::logic_error("no pooled BD row");
}

Outcome coding_gain_ordering() {
  PipelineConfig cfg;
  cfg.seed = 5005;
  cfg.block_size = 8;
  cfg.n = 16;
  cfg.modes = {4};  // D135
  cfg.blocks_per_mode = 25000;
  cfg.tau = 0.0;
  cfg.threads = 1;
  cfg.validate();
  const auto [train, test] = split(generate_data(cfg), cfg.split, cfg.seed);

  struct Job {
    std::string name;
    Method method;
    std::size_t j_max;
  };
  const std::vector<Job> jobs{{"baseline", Method::kBaseline, 0}, {"klt", Method::kKlt, 0},
                              {"sot", Method::kSot, 0},           {"lfnst", Method::kLfnst, 0},
                              {"fasst30", Method::kFasst, 30},    {"fasst60", Method::kFasst, 60},
                              {"fasst90", Method::kFasst, 90},    {"fasst120", Method::kFasst, 120}};
  std::vector<std::vector<RdRow>> rd(jobs.size());
  parallel_for(jobs.size(), 0, [&](std::size_t i) {
    PipelineConfig c = cfg;
    c.j_max = jobs[i].j_max;
    rd[i] = evaluate_bank(train_bank(jobs[i].method, train, c), test, c);
  });
  std::map<std::string, double> bd;
  for (std::size_t i = 1; i < jobs.size(); ++i) bd[jobs[i].name] = pooled_bd(rd[i], rd[0]);

  const bool a = bd["klt"] <= -0.5 && bd["sot"] <= -0.5;
  const bool b = std::abs(bd["fasst120"] - bd["sot"]) <= 0.5;
  const bool c = bd["fasst60"] <= bd["fasst30"] + 0.3 && bd["fasst90"] <= bd["fasst60"] + 0.3 &&
                 bd["fasst120"] <= bd["fasst90"] + 0.3;
  const bool d = bd["fasst120"] <= bd["lfnst"];
  const std::string detail = std::to_string(test.blocks.size()) +
           fmt(" test blocks; BD vs baseline: klt %.3f%%, sot %.3f%%, lfnst %.3f%%", bd["klt"], bd["sot"], bd["lfnst"]) +
           fmt(", fasst J=30/60/90/120: %.3f/%.3f/%.3f/%.3f%%", bd["fasst30"], bd["fasst60"], bd["fasst90"], bd["fasst120"]) +
           " [a " + (a ? "ok" : "FAIL") + ", b " + (b ? "ok" : "FAIL") + ", c " + (c ? "ok" : "FAIL") + ", d " +
           (d ? "ok" : "FAIL") + "]";
  return {a && b && c && d && test.blocks.size() >= 5000, detail};
}

Outcome mode_adaptivity() {
  int wins = 0;
  std::string js;
  for (int seed = 0; seed < 10; ++seed) {
    PipelineConfig cfg;
    cfg.seed = 6000 + static_cast<std::uint64_t>(seed);
    cfg.block_size = 8;
    cfg.n = 16;
    cfg.blocks_per_mode = 1500;
    cfg.tau = 0.05;
    cfg.j_max = 0;
    cfg.validate();
    const auto [train, test] = split(generate_data(cfg), cfg.split, cfg.seed);
    const KernelBank bank = train_bank(Method::kFasst, train, cfg);
    auto mode_j = [&](int mode) {
      double sum = 0.0;
      for (PrimaryKind kind : {PrimaryKind::kDct, PrimaryKind::kAdst}) {
        const KernelEntry* e = bank.find(mode, cfg.block_size, kind);
        sum += static_cast<double>(std::get<FasstKernel>(e->secondary->variant()).rotation_count());
      }
      return sum / 2.0;
    };
    const double d135 = mode_j(4), h = mode_j(2), v = mode_j(1);
    wins += d135 > h && d135 > v;
    js += fmt(seed ? " %.1f/%.1f/%.1f" : "%.1f/%.1f/%.1f", d135, h, v);
  }
  return {wins >= 8, fmt("D135 > H and V on %.0f/10 seeds; J (D135/H/V):", wins) + " " + js};
}

Outcome bd_rate_units() {
  RdCurve anchor{"anchor", {}};
  for (int i = 0; i < 6; ++i) anchor.points.push_back({26 + i, 40.0 * std::pow(0.85, i), 40.0 - 0.9 * i, 0.0});
  auto scaled = [&](double k) {
    RdCurve c = anchor;
    for (auto& p : c.points) p.rate_bits *= k;
    return c;
  };
  const double same = bd_rate(anchor, anchor);
  const double twice = bd_rate(scaled(2.0), anchor);
  const double half = bd_rate(scaled(0.5), anchor);
  return {same == 0.0 && std::abs(twice - 100.0) <= 0.01 && std::abs(half + 50.0) <= 0.01,
          fmt("identical %.6f%%, 2x %.6f%%, 0.5x %.6f%%", same, twice, half)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  PipelineConfig cfg;
  cfg.seed = 8008;
  cfg.block_size = 8;
  cfg.n = 16;
  cfg.modes = {1, 2, 4, 9};
  cfg.blocks_per_mode = 1000;
  cfg.tau = 0.01;
  cfg.j_max = 60;
  cfg.validate();
  const fs::path root = fs::temp_directory_path() / "fasst_acceptance_determinism";
  fs::remove_all(root);

  auto run = [&](const fs::path& dir) {
    fs::create_directories(dir);
    write_dataset(dir / "dataset.bin", generate_data(cfg));
    const auto [train, test] = split(read_dataset(dir / "dataset.bin"), cfg.split, cfg.seed);
    write_kernel_bank(dir / "baseline.json", train_bank(Method::kBaseline, train, cfg));
    write_kernel_bank(dir / "fasst.json", train_bank(Method::kFasst, train, cfg));
    const auto anchor = evaluate_bank(read_kernel_bank(dir / "baseline.json"), test, cfg);
    const auto rows = evaluate_bank(read_kernel_bank(dir / "fasst.json"), test, cfg);
    write_file_atomic(dir / "rd_baseline.csv", rd_rows_to_csv(anchor));
    write_file_atomic(dir / "rd_fasst.csv", rd_rows_to_csv(rows));
    write_file_atomic(dir / "bd.csv", bd_rows_to_csv(bd_rate_rows(rd_rows_from_csv(read_file(dir / "rd_fasst.csv")),
                                                                  rd_rows_from_csv(read_file(dir / "rd_baseline.csv")),
                                                                  BdVariant::kCubic)));
  };
  run(root / "a");
  run(root / "b");
  int differ = 0;
  std::string which;
  for (const char* f : {"dataset.bin", "baseline.json", "fasst.json", "rd_baseline.csv", "rd_fasst.csv", "bd.csv"}) {
    if (read_file(root / "a" / f) != read_file(root / "b" / f)) {
      ++differ;
      which += std::string(" ") + f;
    }
  }
  fs::remove_all(root);
  return {differ == 0, differ == 0 ? "6 artifacts byte-identical across two runs" : "differing:" + which};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "exactness oracles", exactness_oracles},
      {2, "factorization invariants", factorization_invariants},
      {3, "SOT monotonicity", sot_monotonicity},
      {4, "complexity table", complexity_table},
      {5, "coding-gain ordering", coding_gain_ordering},
      {6, "mode adaptivity", mode_adaptivity},
      {7, "BD-rate units", bd_rate_units},
      {8, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("[%s] criterion %d (%s): %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
