#include "fasst/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fasst {

// ---------------------------------------------------------------------------
// Rng

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: zero bound");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (stream * 0xD1B54A32D192ED03ull);
  splitmix64(x);
  return splitmix64(x);
}

// ---------------------------------------------------------------------------
// Mode statistics

void ModeSpec::validate() const {
  if (!(rho_along > 0.0 && rho_along < 1.0) || !(rho_across > 0.0 && rho_across < 1.0)) {
    throw std::invalid_argument("ModeSpec: correlations must lie in (0, 1)");
  }
  if (!(angle_deg >= 0.0 && angle_deg < 180.0)) throw std::invalid_argument("ModeSpec: angle outside [0, 180)");
  if (!(variance > 0.0)) throw std::invalid_argument("ModeSpec: variance must be positive");
}

std::vector<ModeSpec> default_mode_specs(double variance, double rho_along, double rho_across) {
  const double smooth = 0.5 * (rho_along + rho_across);
  return {
      {0, "DC", 0.0, smooth, smooth, variance},
      {1, "V", 90.0, rho_along, rho_across, variance},
      {2, "H", 0.0, rho_along, rho_across, variance},
      {3, "D45", 45.0, rho_along, rho_across, variance},
      {4, "D135", 135.0, rho_along, rho_across, variance},
      {5, "D113", 113.0, rho_along, rho_across, variance},
      {6, "D157", 157.0, rho_along, rho_across, variance},
      {7, "D203", 23.0, rho_along, rho_across, variance},
      {8, "D67", 67.0, rho_along, rho_across, variance},
      {9, "SMOOTH", 0.0, smooth, smooth, variance},
      {10, "SMOOTH_V", 90.0, 0.5 * (rho_along + smooth), smooth, variance},
      {11, "SMOOTH_H", 0.0, 0.5 * (rho_along + smooth), smooth, variance},
  };
}

const ModeSpec& find_mode(const std::vector<ModeSpec>& specs, int mode_id) {
  for (const auto& s : specs) {
    if (s.mode_id == mode_id) return s;
  }
  throw std::invalid_argument("unknown mode id " + std::to_string(mode_id));
}

DenseMatrix directional_covariance(const ModeSpec& spec, std::size_t side) {
  spec.validate();
  const double theta = spec.angle_deg * std::numbers::pi / 180.0;
  // x grows to the right, y grows upward (rows grow downward).
  const double ux = std::cos(theta), uy = std::sin(theta);
  const std::size_t area = side * side;
  DenseMatrix c(area, area);
  for (std::size_t i = 0; i < area; ++i) {
    for (std::size_t j = 0; j < area; ++j) {
      const double dx = static_cast<double>(j % side) - static_cast<double>(i % side);
      const double dy = -(static_cast<double>(j / side) - static_cast<double>(i / side));
      const double along = std::abs(dx * ux + dy * uy);
      const double across = std::abs(-dx * uy + dy * ux);
      c(i, j) = spec.variance * std::pow(spec.rho_along, along) * std::pow(spec.rho_across, across);
    }
  }
  return c;
}

ResidualSampler::ResidualSampler(const ModeSpec& spec, std::size_t side) : side_(side) {
  const DenseMatrix cov = directional_covariance(spec, side);
  const EigenResult eig = jacobi_eigh(cov);
  const double floor = -1e-10 * std::max(1.0, eig.values.front());
  const std::size_t area = side * side;
  root_ = DenseMatrix(area, area);
  for (std::size_t k = 0; k < area; ++k) {
    const double lambda = eig.values[k];
    if (lambda < floor) throw std::runtime_error("ResidualSampler: covariance is not positive semidefinite");
    const double s = std::sqrt(std::max(lambda, 0.0));
    for (std::size_t r = 0; r < area; ++r) root_(r, k) = eig.vectors(r, k) * s;
  }
}

DenseMatrix ResidualSampler::sample(Rng& rng) const {
  const std::size_t area = side_ * side_;
  std::vector<double> z(area);
  for (double& v : z) v = rng.normal();
  return DenseMatrix(side_, side_, multiply(root_, z));
}

std::vector<DenseMatrix> synth_residuals(const ModeSpec& spec, std::size_t n_blocks, std::size_t side,
                                         std::uint64_t seed) {
  ResidualSampler sampler(spec, side);
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(spec.mode_id)));
  std::vector<DenseMatrix> out;
  out.reserve(n_blocks);
  for (std::size_t i = 0; i < n_blocks; ++i) out.push_back(sampler.sample(rng));
  return out;
}

Dataset generate_dataset(const std::vector<ModeSpec>& specs, const std::vector<std::size_t>& counts,
                         std::size_t side, std::uint64_t seed) {
  if (counts.size() != specs.size()) throw std::invalid_argument("generate_dataset: one count per mode required");
  Dataset ds;
  ds.seed = seed;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    for (auto& b : synth_residuals(specs[k], counts[k], side, seed)) {
      ds.blocks.push_back({specs[k].mode_id, std::move(b)});
    }
  }
  return ds;
}

Dataset generate_dataset(const std::vector<ModeSpec>& specs, std::size_t blocks_per_mode, std::size_t side,
                         std::uint64_t seed) {
  return generate_dataset(specs, std::vector<std::size_t>(specs.size(), blocks_per_mode), side, seed);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, SplitRatio ratio, std::uint64_t seed) {
  if (ratio.train == 0 || ratio.test == 0) throw std::invalid_argument("split: both ratio terms must be positive");
  std::map<int, std::vector<std::size_t>> by_mode;
  for (std::size_t i = 0; i < ds.blocks.size(); ++i) by_mode[ds.blocks[i].mode_id].push_back(i);

  std::vector<bool> to_train(ds.blocks.size(), false);
  const std::size_t denom = ratio.train + ratio.test;
  for (auto& [mode, idx] : by_mode) {
    if (idx.size() < denom) {
      throw std::invalid_argument("split: mode " + std::to_string(mode) + " has fewer blocks than the ratio needs");
    }
    Rng rng(derive_seed(seed, 0x5EED0000ull + static_cast<std::uint64_t>(mode)));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const std::size_t n_train = idx.size() * ratio.train / denom;
    for (std::size_t k = 0; k < n_train; ++k) to_train[idx[k]] = true;
  }

  std::pair<Dataset, Dataset> out;
  out.first.seed = out.second.seed = ds.seed;
  for (std::size_t i = 0; i < ds.blocks.size(); ++i) {
    (to_train[i] ? out.first : out.second).blocks.push_back(ds.blocks[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary container

namespace {

template <typename T>
void put_le(std::string& buf, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <typename T>
  T get() {
    using U = std::make_unsigned_t<T>;
    if (pos_ + sizeof(T) > data_.size()) throw std::runtime_error("dataset file is truncated");
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'F', 'S', 'D', 'S'};

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::string buf(kMagic, 4);
  put_le<std::uint32_t>(buf, kDatasetVersion);
  put_le<std::uint64_t>(buf, ds.seed);
  put_le<std::uint64_t>(buf, ds.blocks.size());
  for (const auto& rec : ds.blocks) {
    if (!rec.block.square()) throw std::invalid_argument("write_dataset: blocks must be square");
    put_le<std::int32_t>(buf, rec.mode_id);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(rec.block.rows()));
    for (double v : rec.block.values()) put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));
  }
  // Write to a sibling file and rename so readers never observe a partial file.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}));
  for (char m : kMagic) {
    if (r.get<std::uint8_t>() != static_cast<std::uint8_t>(m)) throw std::runtime_error("not a dataset file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw std::runtime_error("unsupported dataset version " + std::to_string(version));
  }
  Dataset ds;
  ds.seed = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  if (count > r.remaining() / 8) throw std::runtime_error("dataset file is truncated");
  ds.blocks.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    BlockRecord rec;
    rec.mode_id = r.get<std::int32_t>();
    const auto side = r.get<std::uint32_t>();
    if (side == 0 || side > 64) throw std::runtime_error("dataset record has invalid block size");
    std::vector<double> values(static_cast<std::size_t>(side) * side);
    for (double& v : values) v = std::bit_cast<double>(r.get<std::uint64_t>());
    rec.block = DenseMatrix(side, side, std::move(values));
    ds.blocks.push_back(std::move(rec));
  }
  if (r.remaining() != 0) throw std::runtime_error("dataset file has trailing bytes");
  return ds;
}

}  // namespace fasst
