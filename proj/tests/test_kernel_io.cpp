#include <cstring>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "fasst/kernel_io.hpp"
#include "oracles.hpp"

using namespace fasst;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.values().data(), b.values().data(), sizeof(double) * a.values().size()) == 0;
}

KernelBank sample_bank() {
  std::mt19937_64 rng(77);
  KernelBank bank{"mixed", {}};
  const ScanOrder scan = ScanOrder::raster(4, 6);

  const DenseOrthonormal dense(oracle::random_orthonormal(6, rng));
  bank.entries.push_back({0, 4, PrimaryKind::kDct, 64.0, 0.0, scan, SecondaryKernel(dense)});
  bank.entries.push_back({0, 4, PrimaryKind::kAdst, 64.0, 0.0, scan, SecondaryKernel(lfnst_from_klt(dense, 4))});

  FasstKernel g = factorize_approx(oracle::random_matrix(6, 6, rng), 1e-6, 9);
  g.mu = 1.0 / 3.0;
  bank.entries.push_back({4, 4, PrimaryKind::kDct, g.mu, 1e-6, scan, SecondaryKernel(g)});
  bank.entries.push_back({4, 4, PrimaryKind::kAdst, 0.1, 0.05, scan, std::nullopt});
  return bank;
}

}  // namespace

TEST_CASE("kernel banks round-trip bit-exactly") {
  const KernelBank bank = sample_bank();
  const std::string text = kernel_bank_to_json(bank);
  const KernelBank back = kernel_bank_from_json(text);
  CHECK(kernel_bank_to_json(back) == text);
  REQUIRE(back.entries.size() == bank.entries.size());
  CHECK(back.method == "mixed");
  for (std::size_t i = 0; i < bank.entries.size(); ++i) {
    const auto& a = bank.entries[i];
    const auto& b = back.entries[i];
    CHECK(a.mode_id == b.mode_id);
    CHECK(a.primary_kind == b.primary_kind);
    CHECK(same_bits(a.mu, b.mu));
    CHECK(a.scan == b.scan);
    CHECK(a.secondary.has_value() == b.secondary.has_value());
  }
  CHECK(same_bits(std::get<DenseOrthonormal>(bank.entries[0].secondary->variant()).matrix(),
                  std::get<DenseOrthonormal>(back.entries[0].secondary->variant()).matrix()));
  CHECK(std::get<ReducedKernel>(bank.entries[1].secondary->variant()) ==
        std::get<ReducedKernel>(back.entries[1].secondary->variant()));
  const auto& g0 = std::get<FasstKernel>(bank.entries[2].secondary->variant());
  const auto& g1 = std::get<FasstKernel>(back.entries[2].secondary->variant());
  CHECK(g0 == g1);
  CHECK(same_bits(g0.e_final, g1.e_final));
  CHECK(back.find(4, 4, PrimaryKind::kDct) == &back.entries[2]);
  CHECK(back.find(5, 4, PrimaryKind::kDct) == nullptr);
}

TEST_CASE("kernel bank files") {
  const auto path = std::filesystem::temp_directory_path() / "fasst_test_bank.json";
  write_kernel_bank(path, sample_bank());
  CHECK(kernel_bank_to_json(read_kernel_bank(path)) == kernel_bank_to_json(sample_bank()));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_kernel_bank(path), std::runtime_error);
}

TEST_CASE("malformed kernel banks are rejected") {
  std::string text = kernel_bank_to_json(sample_bank());
  CHECK_THROWS_AS(kernel_bank_from_json("{"), std::runtime_error);
  CHECK_THROWS_AS(kernel_bank_from_json(R"({"format_version": 2, "method": "x", "entries": []})"), std::runtime_error);
  CHECK_THROWS_AS(kernel_bank_from_json(R"({"format_version": 1, "method": "x", "entries": [{"mode_id": 0}]})"),
                  std::runtime_error);
  CHECK(kernel_bank_from_json(R"({"format_version": 1, "method": "x", "entries": []})").entries.empty());
  // A repeated rotation pair is structurally invalid.
  KernelBank bad{"bad", {}};
  FasstKernel g = FasstKernel::identity(6);
  g.left = {{1, 0, 0.1}, {1, 0, 0.2}};
  g.right = g.left;
  bad.entries.push_back({0, 4, PrimaryKind::kDct, 1.0, 0.0, ScanOrder::raster(4, 6), SecondaryKernel(g)});
  CHECK_THROWS_AS(kernel_bank_from_json(kernel_bank_to_json(bad)), std::runtime_error);
}
