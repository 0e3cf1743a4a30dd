#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fasst/primary.hpp"
#include "fasst/secondary.hpp"

namespace fasst {

inline constexpr int kKernelFormatVersion = 1;

/// Kernels deployed for one (mode, block size, primary) combination.
struct KernelEntry {
  int mode_id = 0;
  std::size_t block_size = 0;
  PrimaryKind primary_kind = PrimaryKind::kDct;
  double mu = 0.0;
  double tau = 0.0;
  ScanOrder scan;
  std::optional<SecondaryKernel> secondary;
};

struct KernelBank {
  std::string method;
  std::vector<KernelEntry> entries;

  /// nullptr when absent.
  const KernelEntry* find(int mode_id, std::size_t block_size, PrimaryKind kind) const;
};

/// Canonical JSON: sorted keys, shortest round-trip doubles. Reading back
/// reproduces every double bit-for-bit.
std::string kernel_bank_to_json(const KernelBank& bank);
/// Throws std::runtime_error on malformed input or an unknown format_version.
KernelBank kernel_bank_from_json(const std::string& text);

void write_kernel_bank(const std::filesystem::path& path, const KernelBank& bank);
KernelBank read_kernel_bank(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace fasst
