#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fasst/codec.hpp"
#include "fasst/data.hpp"
#include "fasst/eval.hpp"
#include "fasst/kernel_io.hpp"

namespace fasst {

/// Experiment settings, read from and written to canonical JSON. Every
/// field has a default; unknown keys are rejected.
struct PipelineConfig {
  std::uint64_t seed = 1;
  std::size_t block_size = 8;
  std::size_t n = 48;
  std::size_t n_k = 0;  // 0 means round(2n/3)
  std::vector<int> qps{26, 27, 28, 29, 30, 31};

  std::size_t blocks_per_mode = 500;
  std::vector<int> modes;           // empty means all twelve
  std::vector<double> mode_weights;  // relative block counts; empty means uniform
  double variance = 400.0;
  double rho_along = 0.95;
  double rho_across = 0.6;
  SplitRatio split{};

  QuantOverrides overrides{};
  double tau = 0.01;
  std::size_t j_max = 512;  // capped at n(n−1)/2; 0 means the cap
  int cluster_iterations = 2;
  int sot_max_iter = 100;
  double sot_eps = 1e-6;
  int fasst_max_outer = 50;
  double fasst_rel_tol = 1e-5;
  int threads = 0;  // 0 means hardware concurrency

  std::size_t effective_n_k() const;
  std::size_t effective_j_max() const;
  std::vector<ModeSpec> mode_specs() const;
  void validate() const;
};

PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& cfg);

enum class Method { kBaseline, kKlt, kLfnst, kSot, kLfSot, kFasst, kKltGr };
std::string to_string(Method m);
/// "baseline", "klt", "lfnst", "sot", "lf-sot", "fasst", "klt-gr".
Method method_from_string(const std::string& s);

/// Secondary trainer for a method; nullptr-equivalent (empty) for kBaseline.
SecondaryTrainer make_trainer(Method method, const PipelineConfig& cfg);

Dataset generate_data(const PipelineConfig& cfg);

/// Scan orders per mode and primary learned from the training blocks, then
/// annealed secondary training per mode. Modes train in parallel; the result
/// does not depend on the thread count.
KernelBank train_bank(Method method, const Dataset& train, const PipelineConfig& cfg);

struct RdRow {
  std::string method;
  std::string group;  // mode id, or "all" for the pooled curve
  int qp = 0;
  double rate_bits = 0.0;
  double psnr_db = 0.0;
  bool operator==(const RdRow&) const = default;
};

/// RD points per mode present in `test` plus the pooled "all" group.
std::vector<RdRow> evaluate_bank(const KernelBank& bank, const Dataset& test, const PipelineConfig& cfg);

std::string rd_rows_to_csv(const std::vector<RdRow>& rows);
std::vector<RdRow> rd_rows_from_csv(const std::string& text);

struct BdRow {
  std::string method;
  std::string anchor;
  std::string group;  // mode id, "all" (pooled curve) or "mean" (unweighted over modes)
  double percent = 0.0;
};

/// BD-rate per group present in both inputs, plus a "mean" row averaging the
/// per-mode groups without weights.
std::vector<BdRow> bd_rate_rows(const std::vector<RdRow>& test, const std::vector<RdRow>& anchor,
                                BdVariant variant);
std::string bd_rows_to_csv(const std::vector<BdRow>& rows);
/// The headline figure: "mean" row, or "all" when `weighted`.
double bd_summary(const std::vector<BdRow>& rows, bool weighted);

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace fasst
