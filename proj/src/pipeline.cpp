#include "fasst/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fasst/baselines.hpp"
#include "fasst/fasst.hpp"
#include "fasst/sot.hpp"
#include "json.hpp"

namespace fasst {

using nlohmann::json;

std::size_t PipelineConfig::effective_n_k() const {
  if (n_k != 0) return n_k;
  return static_cast<std::size_t>(std::lround(2.0 * static_cast<double>(n) / 3.0));
}

std::size_t PipelineConfig::effective_j_max() const {
  const std::size_t cap = n * (n - 1) / 2;
  return j_max != 0 ? std::min(j_max, cap) : cap;
}

std::vector<ModeSpec> PipelineConfig::mode_specs() const {
  const auto all = default_mode_specs(variance, rho_along, rho_across);
  if (modes.empty()) return all;
  std::vector<ModeSpec> out;
  for (int id : modes) out.push_back(find_mode(all, id));
  return out;
}

void PipelineConfig::validate() const {
  if (block_size != 4 && block_size != 8 && block_size != 16 && block_size != 32) {
    throw std::invalid_argument("config: block_size must be 4, 8, 16 or 32");
  }
  if (n < 2 || n > block_size * block_size) throw std::invalid_argument("config: n out of range");
  if (effective_n_k() < 1 || effective_n_k() > n) throw std::invalid_argument("config: n_k out of range");
  if (qps.size() < 4) throw std::invalid_argument("config: need at least 4 QPs");
  if (std::set<int>(qps.begin(), qps.end()).size() != qps.size()) throw std::invalid_argument("config: repeated QP");
  if (!(tau >= 0.0)) throw std::invalid_argument("config: tau must be nonnegative");
  if (cluster_iterations < 0) throw std::invalid_argument("config: cluster_iterations must be nonnegative");
  if (split.train == 0 || split.test == 0) throw std::invalid_argument("config: split parts must be positive");
  if (!mode_weights.empty()) {
    if (mode_weights.size() != mode_specs().size()) throw std::invalid_argument("config: one weight per mode");
    for (double w : mode_weights)
      if (!(w > 0.0)) throw std::invalid_argument("config: mode weights must be positive");
  }
  for (const auto& s : mode_specs()) s.validate();
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["block_size"] = c.block_size;
  j["n"] = c.n;
  j["n_k"] = c.n_k;
  j["qps"] = c.qps;
  j["blocks_per_mode"] = c.blocks_per_mode;
  j["modes"] = c.modes;
  j["mode_weights"] = c.mode_weights;
  j["variance"] = c.variance;
  j["rho_along"] = c.rho_along;
  j["rho_across"] = c.rho_across;
  j["split"] = {c.split.train, c.split.test};
  j["lambda"] = optional_json(c.overrides.lambda);
  j["mu"] = optional_json(c.overrides.mu);
  j["tau"] = c.tau;
  j["j_max"] = c.j_max;
  j["cluster_iterations"] = c.cluster_iterations;
  j["sot_max_iter"] = c.sot_max_iter;
  j["sot_eps"] = c.sot_eps;
  j["fasst_max_outer"] = c.fasst_max_outer;
  j["fasst_rel_tol"] = c.fasst_rel_tol;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "block_size") c.block_size = v.get<std::size_t>();
      else if (k == "n") c.n = v.get<std::size_t>();
      else if (k == "n_k") c.n_k = v.get<std::size_t>();
      else if (k == "qps") c.qps = v.get<std::vector<int>>();
      else if (k == "blocks_per_mode") c.blocks_per_mode = v.get<std::size_t>();
      else if (k == "modes") c.modes = v.get<std::vector<int>>();
      else if (k == "mode_weights") c.mode_weights = v.get<std::vector<double>>();
      else if (k == "variance") c.variance = v.get<double>();
      else if (k == "rho_along") c.rho_along = v.get<double>();
      else if (k == "rho_across") c.rho_across = v.get<double>();
      else if (k == "split") {
        const auto parts = v.get<std::vector<std::size_t>>();
        if (parts.size() != 2) throw std::invalid_argument("config: split must be [train, test]");
        c.split = {parts[0], parts[1]};
      } else if (k == "lambda") c.overrides.lambda = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (k == "mu") c.overrides.mu = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (k == "tau") c.tau = v.get<double>();
      else if (k == "j_max") c.j_max = v.get<std::size_t>();
      else if (k == "cluster_iterations") c.cluster_iterations = v.get<int>();
      else if (k == "sot_max_iter") c.sot_max_iter = v.get<int>();
      else if (k == "sot_eps") c.sot_eps = v.get<double>();
      else if (k == "fasst_max_outer") c.fasst_max_outer = v.get<int>();
      else if (k == "fasst_rel_tol") c.fasst_rel_tol = v.get<double>();
      else if (k == "threads") c.threads = v.get<int>();
      else throw std::invalid_argument("config: unknown key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

std::string to_string(Method m) {
  switch (m) {
    case Method::kBaseline: return "baseline";
    case Method::kKlt: return "klt";
    case Method::kLfnst: return "lfnst";
    case Method::kSot: return "sot";
    case Method::kLfSot: return "lf-sot";
    case Method::kFasst: return "fasst";
    case Method::kKltGr: return "klt-gr";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::kBaseline, Method::kKlt, Method::kLfnst, Method::kSot, Method::kLfSot, Method::kFasst,
                   Method::kKltGr}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown method: " + s);
}

SecondaryTrainer make_trainer(Method method, const PipelineConfig& cfg) {
  SotOptions sot;
  sot.max_iter = cfg.sot_max_iter;
  sot.eps = cfg.sot_eps;
  const std::size_t n_k = cfg.effective_n_k();
  const std::size_t j_max = cfg.effective_j_max();
  const double tau = cfg.tau;
  using Prev = std::optional<SecondaryKernel>;

  switch (method) {
    case Method::kBaseline:
      return {};
    case Method::kKlt:
      return [](PrimaryKind, const DenseMatrix& x, const QuantConfig&, const Prev&) {
        return SecondaryKernel(klt_learn(x));
      };
    case Method::kLfnst:
      return [n_k](PrimaryKind, const DenseMatrix& x, const QuantConfig&, const Prev&) {
        return SecondaryKernel(lfnst_from_klt(klt_learn(x), n_k));
      };
    case Method::kSot:
      return [sot](PrimaryKind, const DenseMatrix& x, const QuantConfig& qc, const Prev& prev) {
        if (prev) return SecondaryKernel(sot_learn(x, qc.mu(), prev->dense(), sot).f);
        return SecondaryKernel(sot_learn(x, qc.mu(), sot).f);
      };
    case Method::kLfSot:
      // The reduced kernel cannot seed a full SOT, so every stage starts from the KLT.
      return [sot, n_k](PrimaryKind, const DenseMatrix& x, const QuantConfig& qc, const Prev&) {
        return SecondaryKernel(lf_sot(sot_learn(x, qc.mu(), sot), n_k));
      };
    case Method::kFasst: {
      FasstOptions base;
      base.tau = tau;
      base.j_max = j_max;
      base.max_outer = cfg.fasst_max_outer;
      base.rel_tol = cfg.fasst_rel_tol;
      base.sot = sot;
      return [base](PrimaryKind, const DenseMatrix& x, const QuantConfig& qc, const Prev& prev) {
        FasstOptions o = base;
        if (const auto* k = prev ? std::get_if<FasstKernel>(&prev->variant()) : nullptr) {
          o.initial_kernel = *k;
        } else if (prev) {
          o.initial_transform = prev->dense();
        }
        return SecondaryKernel(fasst_learn(x, qc.mu(), o).kernel);
      };
    }
    case Method::kKltGr:
      return [tau, j_max](PrimaryKind, const DenseMatrix& x, const QuantConfig&, const Prev&) {
        return SecondaryKernel(klt_gr(klt_learn(x), tau, j_max));
      };
  }
  throw std::invalid_argument("make_trainer: unknown method");
}

Dataset generate_data(const PipelineConfig& cfg) {
  cfg.validate();
  const auto specs = cfg.mode_specs();
  std::vector<std::size_t> counts(specs.size(), cfg.blocks_per_mode);
  if (!cfg.mode_weights.empty()) {
    double sum = 0.0;
    for (double w : cfg.mode_weights) sum += w;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      counts[i] = static_cast<std::size_t>(
          std::llround(cfg.mode_weights[i] * static_cast<double>(specs.size() * cfg.blocks_per_mode) / sum));
    }
  }
  return generate_dataset(specs, counts, cfg.block_size, cfg.seed);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::map<int, std::vector<DenseMatrix>> blocks_by_mode(const Dataset& ds, std::size_t block_size) {
  std::map<int, std::vector<DenseMatrix>> out;
  for (const auto& r : ds.blocks) {
    if (r.block.rows() != block_size || r.block.cols() != block_size) {
      throw std::invalid_argument("dataset block size does not match config");
    }
    out[r.mode_id].push_back(r.block);
  }
  return out;
}

ScanOrder scan_for(const std::vector<DenseMatrix>& blocks, PrimaryKind kind, std::size_t block_size, std::size_t n) {
  const PrimaryKernel p = PrimaryKernel::make(kind, block_size);
  std::vector<DenseMatrix> coeffs;
  coeffs.reserve(blocks.size());
  for (const auto& b : blocks) coeffs.push_back(apply_primary(b, p, false));
  return learn_scan_order(coeffs, n);
}

}  // namespace

KernelBank train_bank(Method method, const Dataset& train, const PipelineConfig& cfg) {
  cfg.validate();
  const auto by_mode = blocks_by_mode(train, cfg.block_size);
  std::vector<int> mode_ids;
  for (const auto& [id, _] : by_mode) mode_ids.push_back(id);
  const SecondaryTrainer trainer = make_trainer(method, cfg);
  const bool rotations = method == Method::kFasst || method == Method::kKltGr;
  const double final_mu = QuantConfig(*std::min_element(cfg.qps.begin(), cfg.qps.end()), cfg.overrides).mu();

  std::vector<std::array<KernelEntry, 2>> results(mode_ids.size());
  parallel_for(mode_ids.size(), cfg.threads, [&](std::size_t i) {
    const auto& blocks = by_mode.at(mode_ids[i]);
    const CandidateSet base =
        CandidateSet::primary_only(cfg.block_size, scan_for(blocks, PrimaryKind::kDct, cfg.block_size, cfg.n),
                                   scan_for(blocks, PrimaryKind::kAdst, cfg.block_size, cfg.n));
    CandidateSet trained = base;
    if (trainer) trained = anneal_train(blocks, base, cfg.qps, trainer, cfg.cluster_iterations, cfg.overrides).candidates;
    for (int k = 0; k < 2; ++k) {
      const PrimaryBranch& b = trained.branches[k];
      results[i][k] = KernelEntry{mode_ids[i], cfg.block_size, b.primary.kind, trainer ? final_mu : 0.0,
                                  rotations ? cfg.tau : 0.0, b.scan, b.secondary};
    }
  });

  KernelBank bank{to_string(method), {}};
  for (auto& pair : results)
    for (auto& e : pair) bank.entries.push_back(std::move(e));
  return bank;
}

// ---------------------------------------------------------------------------

std::vector<RdRow> evaluate_bank(const KernelBank& bank, const Dataset& test, const PipelineConfig& cfg) {
  cfg.validate();
  const auto by_mode = blocks_by_mode(test, cfg.block_size);
  std::vector<int> mode_ids;
  std::vector<CandidateSet> sets;
  for (const auto& [id, _] : by_mode) {
    const KernelEntry* d = bank.find(id, cfg.block_size, PrimaryKind::kDct);
    const KernelEntry* a = bank.find(id, cfg.block_size, PrimaryKind::kAdst);
    if (!d || !a) throw std::invalid_argument("kernel bank has no entry for mode " + std::to_string(id));
    CandidateSet s{{PrimaryBranch{PrimaryKernel::make(PrimaryKind::kDct, cfg.block_size), d->scan, d->secondary},
                    PrimaryBranch{PrimaryKernel::make(PrimaryKind::kAdst, cfg.block_size), a->scan, a->secondary}}};
    s.validate();
    mode_ids.push_back(id);
    sets.push_back(std::move(s));
  }

  const std::size_t nq = cfg.qps.size();
  std::vector<RdTotals> totals(mode_ids.size() * nq);
  parallel_for(totals.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t m = job / nq, q = job % nq;
    const std::vector<EvalGroup> g{{by_mode.at(mode_ids[m]), &sets[m]}};
    totals[job] = encode_all(g, QuantConfig(cfg.qps[q], cfg.overrides));
  });

  std::vector<RdRow> rows;
  for (std::size_t m = 0; m < mode_ids.size(); ++m) {
    for (std::size_t q = 0; q < nq; ++q) {
      const RdPoint p = rd_point(cfg.qps[q], totals[m * nq + q]);
      rows.push_back({bank.method, std::to_string(mode_ids[m]), p.qp, p.rate_bits, p.psnr_db});
    }
  }
  for (std::size_t q = 0; q < nq; ++q) {
    RdTotals pooled;
    for (std::size_t m = 0; m < mode_ids.size(); ++m) {
      const RdTotals& t = totals[m * nq + q];
      pooled.bits += t.bits;
      pooled.sse += t.sse;
      pooled.pixels += t.pixels;
      pooled.blocks += t.blocks;
    }
    const RdPoint p = rd_point(cfg.qps[q], pooled);
    rows.push_back({bank.method, "all", p.qp, p.rate_bits, p.psnr_db});
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string rd_rows_to_csv(const std::vector<RdRow>& rows) {
  std::string out = "method,group,qp,rate_bits,psnr_db\n";
  for (const auto& r : rows) {
    out += r.method + "," + r.group + "," + std::to_string(r.qp) + "," + fmt(r.rate_bits) + "," + fmt(r.psnr_db) + "\n";
  }
  return out;
}

std::vector<RdRow> rd_rows_from_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != "method,group,qp,rate_bits,psnr_db") {
    throw std::runtime_error("rd_points CSV: unexpected header");
  }
  std::vector<RdRow> rows;
  std::size_t lineno = 1;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw std::runtime_error("rd_points CSV: line " + std::to_string(lineno) + " has wrong arity");
    try {
      rows.push_back({cells[0], cells[1], std::stoi(cells[2]), std::stod(cells[3]), std::stod(cells[4])});
    } catch (const std::exception&) {
      throw std::runtime_error("rd_points CSV: bad number on line " + std::to_string(lineno));
    }
  }
  return rows;
}

std::vector<BdRow> bd_rate_rows(const std::vector<RdRow>& test, const std::vector<RdRow>& anchor, BdVariant variant) {
  auto curves = [](const std::vector<RdRow>& rows) {
    std::vector<std::string> order;
    std::map<std::string, RdCurve> by_group;
    for (const auto& r : rows) {
      auto [it, inserted] = by_group.try_emplace(r.group, RdCurve{r.method, {}});
      if (inserted) order.push_back(r.group);
      it->second.points.push_back({r.qp, r.rate_bits, r.psnr_db, 0.0});
    }
    return std::pair(order, by_group);
  };
  const auto [order, tc] = curves(test);
  const auto [_, ac] = curves(anchor);
  if (order.empty()) throw std::invalid_argument("bd_rate: empty test curve set");

  std::vector<BdRow> out;
  double sum = 0.0;
  std::size_t modes = 0;
  std::optional<BdRow> pooled;
  for (const auto& g : order) {
    const auto it = ac.find(g);
    if (it == ac.end()) continue;
    BdRow row{tc.at(g).label, it->second.label, g, bd_rate(tc.at(g), it->second, variant)};
    if (g == "all") {
      pooled = row;
      continue;
    }
    sum += row.percent;
    ++modes;
    out.push_back(std::move(row));
  }
  if (modes == 0 && !pooled) throw std::invalid_argument("bd_rate: no group in common");
  if (modes > 0) {
    const std::string method = out.front().method, anchor_name = out.front().anchor;
    out.push_back({method, anchor_name, "mean", sum / static_cast<double>(modes)});
  }
  if (pooled) out.push_back(*pooled);
  return out;
}

std::string bd_rows_to_csv(const std::vector<BdRow>& rows) {
  std::string out = "method,anchor,group,percent\n";
  for (const auto& r : rows) out += r.method + "," + r.anchor + "," + r.group + "," + fmt(r.percent) + "\n";
  return out;
}

double bd_summary(const std::vector<BdRow>& rows, bool weighted) {
  const std::string want = weighted ? "all" : "mean";
  for (const auto& r : rows)
    if (r.group == want) return r.percent;
  // A single group has no separate mean row.
  if (!rows.empty()) return rows.front().percent;
  throw std::invalid_argument("bd_summary: no rows");
}

}  // namespace fasst
