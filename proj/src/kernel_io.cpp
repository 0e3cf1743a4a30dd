#include "fasst/kernel_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fasst {

using nlohmann::json;

const KernelEntry* KernelBank::find(int mode_id, std::size_t block_size, PrimaryKind kind) const {
  for (const auto& e : entries) {
    if (e.mode_id == mode_id && e.block_size == block_size && e.primary_kind == kind) return &e;
  }
  return nullptr;
}

namespace {

json matrix_to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

DenseMatrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) throw std::runtime_error("kernel file: matrix has wrong row count");
  DenseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (row.size() != cols) throw std::runtime_error("kernel file: matrix has wrong column count");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

json secondary_to_json(const SecondaryKernel& k) {
  json j;
  j["type"] = k.type_name();
  if (const auto* d = std::get_if<DenseOrthonormal>(&k.variant())) {
    j["n"] = d->n();
    j["matrix"] = matrix_to_json(d->matrix());
  } else if (const auto* r = std::get_if<ReducedKernel>(&k.variant())) {
    j["n"] = r->n;
    j["n_k"] = r->n_k;
    j["matrix"] = matrix_to_json(r->matrix);
  } else {
    const auto& g = std::get<FasstKernel>(k.variant());
    j["n"] = g.n;
    j["J"] = g.rotation_count();
    j["mu"] = g.mu;
    j["tau"] = g.tau;
    j["e_final"] = g.e_final;
    json rot = json::array();
    for (std::size_t i = 0; i < g.rotation_count(); ++i) {
      rot.push_back({{"m", g.left[i].p}, {"n", g.left[i].q}, {"alpha", g.left[i].angle}, {"beta", g.right[i].angle}});
    }
    j["rotations"] = std::move(rot);
  }
  return j;
}

SecondaryKernel secondary_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  const std::size_t n = j.at("n").get<std::size_t>();
  if (type == "dense") return SecondaryKernel(DenseOrthonormal(matrix_from_json(j.at("matrix"), n, n)));
  if (type == "reduced") {
    const std::size_t n_k = j.at("n_k").get<std::size_t>();
    ReducedKernel r{n, n_k, matrix_from_json(j.at("matrix"), n_k, n)};
    r.validate();
    return SecondaryKernel(std::move(r));
  }
  if (type == "givens") {
    FasstKernel g = FasstKernel::identity(n);
    g.mu = j.at("mu").get<double>();
    g.tau = j.at("tau").get<double>();
    g.e_final = j.at("e_final").get<double>();
    for (const auto& r : j.at("rotations")) {
      const std::size_t m = r.at("m").get<std::size_t>(), q = r.at("n").get<std::size_t>();
      g.left.push_back({m, q, r.at("alpha").get<double>()});
      g.right.push_back({m, q, r.at("beta").get<double>()});
    }
    if (g.rotation_count() != j.at("J").get<std::size_t>()) throw std::runtime_error("kernel file: J mismatch");
    g.validate();
    return SecondaryKernel(std::move(g));
  }
  throw std::runtime_error("kernel file: unknown secondary type '" + type + "'");
}

}  // namespace

std::string kernel_bank_to_json(const KernelBank& bank) {
  json root;
  root["format_version"] = kKernelFormatVersion;
  root["method"] = bank.method;
  json entries = json::array();
  for (const auto& e : bank.entries) {
    json j;
    j["format_version"] = kKernelFormatVersion;
    j["mode_id"] = e.mode_id;
    j["block_size"] = e.block_size;
    j["primary_kind"] = to_string(e.primary_kind);
    j["mu"] = e.mu;
    j["tau"] = e.tau;
    j["scan"] = {{"block_size", e.scan.block_size},
                 {"n_selected", e.scan.n_selected},
                 {"permutation", e.scan.permutation}};
    j["secondary"] = e.secondary ? secondary_to_json(*e.secondary) : json(nullptr);
    entries.push_back(std::move(j));
  }
  root["entries"] = std::move(entries);
  return root.dump(1) + "\n";
}

KernelBank kernel_bank_from_json(const std::string& text) {
  try {
    const json root = json::parse(text);
    if (root.at("format_version").get<int>() != kKernelFormatVersion) {
      throw std::runtime_error("kernel file: unsupported format_version");
    }
    KernelBank bank;
    bank.method = root.at("method").get<std::string>();
    for (const auto& j : root.at("entries")) {
      KernelEntry e;
      e.mode_id = j.at("mode_id").get<int>();
      e.block_size = j.at("block_size").get<std::size_t>();
      e.primary_kind = primary_kind_from_string(j.at("primary_kind").get<std::string>());
      e.mu = j.at("mu").get<double>();
      e.tau = j.at("tau").get<double>();
      const json& s = j.at("scan");
      e.scan.block_size = s.at("block_size").get<std::size_t>();
      e.scan.n_selected = s.at("n_selected").get<std::size_t>();
      e.scan.permutation = s.at("permutation").get<std::vector<std::size_t>>();
      if (!e.scan.valid() || e.scan.block_size != e.block_size) throw std::runtime_error("kernel file: invalid scan");
      if (!j.at("secondary").is_null()) {
        e.secondary = secondary_from_json(j.at("secondary"));
        if (e.secondary->input_size() != e.scan.n_selected) {
          throw std::runtime_error("kernel file: secondary size does not match scan");
        }
      }
      bank.entries.push_back(std::move(e));
    }
    return bank;
  } catch (const json::exception& ex) {
    throw std::runtime_error(std::string("kernel file: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw std::runtime_error(std::string("kernel file: ") + ex.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_kernel_bank(const std::filesystem::path& path, const KernelBank& bank) {
  write_file_atomic(path, kernel_bank_to_json(bank));
}

KernelBank read_kernel_bank(const std::filesystem::path& path) { return kernel_bank_from_json(read_file(path)); }

}  // namespace fasst
