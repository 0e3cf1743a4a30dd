#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fasst/linalg.hpp"

namespace fasst {

/// mt19937_64 bits with explicit uniform/normal transforms, so streams do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Independent substream seed for (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Synthetic intra-mode residual statistics: zero-mean Gaussian blocks with
/// covariance variance·rho_along^|Δ·u|·rho_across^|Δ·u⊥| where u points
/// along the prediction direction.
struct ModeSpec {
  int mode_id = 0;
  std::string name;
  double angle_deg = 0.0;  // [0, 180); 0 = horizontal, 90 = vertical
  double rho_along = 0.95;
  double rho_across = 0.6;
  double variance = 1.0;

  void validate() const;
};

/// Twelve modes after the principal intra directions (V, H, D45, D135,
/// D113, D157, D203, D67) plus four non-directional ones.
std::vector<ModeSpec> default_mode_specs(double variance = 400.0, double rho_along = 0.95,
                                         double rho_across = 0.6);
const ModeSpec& find_mode(const std::vector<ModeSpec>& specs, int mode_id);

/// N²×N² covariance over raster positions (row·N + col).
DenseMatrix directional_covariance(const ModeSpec& spec, std::size_t side);

/// Draws blocks through a covariance square root from a symmetric eigensolve.
class ResidualSampler {
 public:
  ResidualSampler(const ModeSpec& spec, std::size_t side);
  DenseMatrix sample(Rng& rng) const;
  std::size_t side() const { return side_; }

 private:
  std::size_t side_;
  DenseMatrix root_;  // C = root·rootᵀ
};

std::vector<DenseMatrix> synth_residuals(const ModeSpec& spec, std::size_t n_blocks, std::size_t side,
                                         std::uint64_t seed);

struct BlockRecord {
  int mode_id = 0;
  DenseMatrix block;  // N×N residual
  bool operator==(const BlockRecord&) const = default;
};

struct Dataset {
  std::vector<BlockRecord> blocks;
  std::uint64_t seed = 0;
  bool operator==(const Dataset&) const = default;
};

/// `counts[k]` blocks of mode `specs[k]`.
Dataset generate_dataset(const std::vector<ModeSpec>& specs, const std::vector<std::size_t>& counts,
                         std::size_t side, std::uint64_t seed);
Dataset generate_dataset(const std::vector<ModeSpec>& specs, std::size_t blocks_per_mode,
                         std::size_t side, std::uint64_t seed);

struct SplitRatio {
  std::size_t train = 4;
  std::size_t test = 1;
};

/// Stratified by mode: each mode with k blocks sends floor(k·train/(train+test))
/// to the training side. Both sides keep the original block order.
std::pair<Dataset, Dataset> split(const Dataset& ds, SplitRatio ratio, std::uint64_t seed);

/// Little-endian container:
///   "FSDS" | u32 version | u64 seed | u64 count |
///   count × { i32 mode_id | u32 N | N² × f64 row-major }
inline constexpr std::uint32_t kDatasetVersion = 1;
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace fasst
