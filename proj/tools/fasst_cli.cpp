// fasst — experiment driver: synthetic data, kernel training, RD evaluation,
// BD-rate, complexity accounting and correlation inspection.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "fasst/baselines.hpp"
#include "fasst/pipeline.hpp"

namespace fs = std::filesystem;
using namespace fasst;

namespace {

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) {
    PipelineConfig c;
    c.validate();
    return c;
  }
  return config_from_json(read_file(path));
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", v);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string matrix_csv(const DenseMatrix& m) {
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += num(m(r, c));
    }
    out += '\n';
  }
  return out;
}

// Rows are basis vectors in every case, so heatmaps line up across kernel types.
DenseMatrix kernel_matrix(const SecondaryKernel& k) {
  return std::visit(
      [](const auto& v) -> DenseMatrix {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ReducedKernel>) {
          return v.matrix;
        } else if constexpr (std::is_same_v<T, FasstKernel>) {
          return to_dense(v).matrix().transposed();
        } else {
          return v.matrix().transposed();
        }
      },
      k.variant());
}

std::string complexity_csv(const ComplexityReport& r) {
  std::string out = "method,mults,adds,fraction\n";
  out += r.method + "," + num(r.multiplications) + "," + num(r.additions) + "," + num(r.fraction_vs_klt) + "\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned secondary transforms: training, RD evaluation and complexity accounting"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "JSON experiment config (defaults apply when omitted)")
      ->check(CLI::ExistingFile);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic residual dataset");
  std::string gen_out = "dataset.bin";
  gen->add_option("-o,--out", gen_out, "Dataset file");

  // train
  auto* train = app.add_subcommand("train", "Train a kernel bank on the training split");
  std::string method_name, train_data = "dataset.bin", train_out;
  train->add_option("method", method_name, "baseline | klt | lfnst | sot | lf-sot | fasst | klt-gr")
      ->required()
      ->check(CLI::IsMember({"baseline", "klt", "lfnst", "sot", "lf-sot", "fasst", "klt-gr"}));
  train->add_option("-d,--data", train_data, "Dataset file")->check(CLI::ExistingFile);
  train->add_option("-o,--out", train_out, "Kernel bank file (default: kernels_<method>.json)");

  // eval
  auto* eval = app.add_subcommand("eval", "Encode the test split and emit RD points");
  std::string eval_data = "dataset.bin", eval_kernels, eval_out;
  eval->add_option("-d,--data", eval_data, "Dataset file")->check(CLI::ExistingFile);
  eval->add_option("-k,--kernels", eval_kernels, "Kernel bank file")->required()->check(CLI::ExistingFile);
  eval->add_option("-o,--out", eval_out, "RD points CSV (default: stdout)");

  // bdrate
  auto* bd = app.add_subcommand("bdrate", "BD-rate of one RD points CSV against another");
  std::string bd_test, bd_anchor, bd_out, bd_variant = "cubic";
  bool bd_weighted = false;
  bd->add_option("test", bd_test, "Test RD points CSV")->required()->check(CLI::ExistingFile);
  bd->add_option("anchor", bd_anchor, "Anchor RD points CSV")->required()->check(CLI::ExistingFile);
  bd->add_flag("--weighted", bd_weighted, "Report the pooled curve instead of the unweighted mean over modes");
  bd->add_option("--variant", bd_variant, "cubic | pchip")->check(CLI::IsMember({"cubic", "pchip"}));
  bd->add_option("-o,--out", bd_out, "Per-group BD-rate CSV");

  // complexity
  auto* cx = app.add_subcommand("complexity", "Multiplication and addition counts");
  std::string cx_method = "fasst", cx_kernels, cx_out;
  std::optional<std::size_t> cx_n, cx_j, cx_nk;
  cx->add_option("--method", cx_method, "klt | lfnst | fasst | fasst-adaptive")
      ->check(CLI::IsMember({"klt", "lfnst", "fasst", "fasst-adaptive"}));
  cx->add_option("--n", cx_n, "Secondary transform size (default: config n)")->check(CLI::PositiveNumber);
  cx->add_option("--J", cx_j, "Rotation count for fasst (default: config j_max)")->check(CLI::PositiveNumber);
  cx->add_option("--n_k", cx_nk, "Retained coefficients for lfnst (default: config n_k)")->check(CLI::PositiveNumber);
  cx->add_option("-k,--kernels", cx_kernels, "Kernel bank for fasst-adaptive")->check(CLI::ExistingFile);
  cx->add_option("-o,--out", cx_out, "Complexity CSV");

  // inspect
  auto* ins = app.add_subcommand("inspect", "Correlation matrices before/after a kernel, and the kernel heatmap");
  std::string ins_data = "dataset.bin", ins_kernels, ins_dir = "inspect", ins_primary = "DCT";
  int ins_mode = 4;  // D135
  ins->add_option("-d,--data", ins_data, "Dataset file")->check(CLI::ExistingFile);
  ins->add_option("-k,--kernels", ins_kernels, "Kernel bank file")->required()->check(CLI::ExistingFile);
  ins->add_option("--mode", ins_mode, "Mode id");
  ins->add_option("--primary", ins_primary, "DCT | ADST")->check(CLI::IsMember({"DCT", "ADST"}));
  ins->add_option("-o,--out-dir", ins_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    const PipelineConfig cfg = load_config(config_path);

    if (*gen) {
      const Dataset ds = generate_data(cfg);
      write_dataset(gen_out, ds);
      std::cerr << "wrote " << ds.blocks.size() << " blocks to " << gen_out << "\n";
    } else if (*train) {
      const Method m = method_from_string(method_name);
      const auto [train_set, test_set] = split(read_dataset(train_data), cfg.split, cfg.seed);
      const KernelBank bank = train_bank(m, train_set, cfg);
      const std::string out = train_out.empty() ? "kernels_" + method_name + ".json" : train_out;
      write_kernel_bank(out, bank);
      std::cerr << "trained " << bank.entries.size() << " kernels on " << train_set.blocks.size() << " blocks -> "
                << out << "\n";
    } else if (*eval) {
      const KernelBank bank = read_kernel_bank(eval_kernels);
      const auto [train_set, test_set] = split(read_dataset(eval_data), cfg.split, cfg.seed);
      const std::string csv = rd_rows_to_csv(evaluate_bank(bank, test_set, cfg));
      if (eval_out.empty()) {
        std::cout << csv;
      } else {
        write_file_atomic(eval_out, csv);
      }
    } else if (*bd) {
      const auto variant = bd_variant == "pchip" ? BdVariant::kPchip : BdVariant::kCubic;
      const auto rows =
          bd_rate_rows(rd_rows_from_csv(read_file(bd_test)), rd_rows_from_csv(read_file(bd_anchor)), variant);
      if (!bd_out.empty()) write_file_atomic(bd_out, bd_rows_to_csv(rows));
      std::cout << percent(bd_summary(rows, bd_weighted)) << "\n";
    } else if (*cx) {
      const std::size_t n = cx_n.value_or(cfg.n);
      ComplexityReport r;
      if (cx_method == "klt") {
        r = complexity_klt(n);
      } else if (cx_method == "lfnst") {
        r = complexity_lfnst(n, cx_nk.value_or(cfg.effective_n_k()));
      } else if (cx_method == "fasst") {
        r = complexity_fasst(n, cx_j.value_or(cfg.effective_j_max()));
      } else {
        if (cx_kernels.empty()) throw std::invalid_argument("fasst-adaptive needs --kernels");
        const KernelBank bank = read_kernel_bank(cx_kernels);
        // Per mode: the mean rotation count over its primary branches.
        std::map<int, std::pair<std::size_t, std::size_t>> per_mode;
        for (const auto& e : bank.entries) {
          if (!e.secondary) continue;
          const auto* k = std::get_if<FasstKernel>(&e.secondary->variant());
          if (!k) throw std::invalid_argument("fasst-adaptive: bank holds non-rotation kernels");
          per_mode[e.mode_id].first += k->rotation_count();
          per_mode[e.mode_id].second += 1;
        }
        std::vector<std::size_t> js;
        for (const auto& [mode, acc] : per_mode) js.push_back((acc.first + acc.second / 2) / acc.second);
        r = complexity_fasst_adaptive(n, js);
      }
      if (!cx_out.empty()) write_file_atomic(cx_out, complexity_csv(r));
      std::cout << r.method << " n=" << n << ": " << num(r.multiplications) << " mults, " << num(r.additions)
                << " adds, " << percent(100.0 * r.fraction_vs_klt) << " of KLT";
      if (r.actual_multiplications) {
        std::cout << " (two-pass application: " << num(*r.actual_multiplications) << " mults, "
                  << num(*r.actual_additions) << " adds)";
      }
      std::cout << "\n";
    } else if (*ins) {
      const KernelBank bank = read_kernel_bank(ins_kernels);
      const PrimaryKind kind = primary_kind_from_string(ins_primary);
      const KernelEntry* e = bank.find(ins_mode, cfg.block_size, kind);
      if (!e) throw std::invalid_argument("no kernel for mode " + std::to_string(ins_mode));
      const auto [train_set, test_set] = split(read_dataset(ins_data), cfg.split, cfg.seed);
      std::vector<DenseMatrix> blocks;
      for (const auto& b : test_set.blocks)
        if (b.mode_id == ins_mode) blocks.push_back(b.block);
      const PrimaryBranch branch{PrimaryKernel::make(kind, cfg.block_size), e->scan, e->secondary};
      const DenseMatrix x = lowfreq_samples(blocks, branch);

      fs::create_directories(ins_dir);
      const CorrelationSummary before = correlation_inspect(x);
      write_file_atomic(fs::path(ins_dir) / "correlation_before.csv", matrix_csv(before.correlation));
      std::cout << "before: off-diagonal energy " << num(before.off_diagonal_energy) << ", diagonal "
                << num(before.diagonal_energy) << "\n";
      if (e->secondary) {
        const CorrelationSummary after = correlation_inspect(x, &*e->secondary);
        write_file_atomic(fs::path(ins_dir) / "correlation_after.csv", matrix_csv(after.correlation));
        write_file_atomic(fs::path(ins_dir) / "kernel.csv", matrix_csv(kernel_matrix(*e->secondary)));
        std::cout << "after " << e->secondary->type_name() << ": off-diagonal energy "
                  << num(after.off_diagonal_energy) << ", diagonal " << num(after.diagonal_energy) << "\n";
        if (!after.zero_variance.empty()) {
          std::cout << "warning: " << after.zero_variance.size() << " zero-variance coefficients\n";
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
