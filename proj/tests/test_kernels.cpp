#include <random>
#include <vector>

#include "doctest.h"
#include "hemips/kernels.hpp"

using namespace hemips::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("active table is one of the known variants") {
  const auto& t = active();
  CHECK((t.name == "scalar" || t.name == "avx2"));
  if (cpu_has_avx2() && avx2_table() != nullptr) CHECK(t.name == "avx2");
}

TEST_CASE("scalar reference on small hand values") {
  const double a[] = {1.0, 2.0, 2.0};
  const double b[] = {0.0, 0.0, 0.0};
  CHECK(scalar_table().dot(a, a, 3) == doctest::Approx(9.0));
  CHECK(scalar_table().squared_distance(a, b, 3) == doctest::Approx(9.0));
  CHECK(scalar_table().dot(a, b, 0) == 0.0);
}

TEST_CASE("avx2 variant matches scalar reference for every tail length") {
  const KernelTable* simd = avx2_table();
  if (simd == nullptr || !cpu_has_avx2()) return;
  std::mt19937_64 rng(11);
  const auto& ref = scalar_table();
  for (std::size_t n = 0; n <= 67; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = random_vec(rng, n);
      const auto b = random_vec(rng, n);
      const double tol = 1e-13 * (1.0 + static_cast<double>(n));
      CHECK(std::abs(simd->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= tol);
      CHECK(std::abs(simd->squared_distance(a.data(), b.data(), n) -
                     ref.squared_distance(a.data(), b.data(), n)) <= tol);
    }
  }
}

TEST_CASE("batched row distances agree between variants and with single calls") {
  std::mt19937_64 rng(5);
  const std::size_t dims = 45, rows = 31, stride = 48;
  auto data = random_vec(rng, rows * stride);
  auto q = random_vec(rng, dims);
  std::vector<double> out_ref(rows), out_simd(rows);
  scalar_table().squared_distances_to(q.data(), data.data(), dims, stride, rows, out_ref.data());
  for (std::size_t r = 0; r < rows; ++r)
    CHECK(out_ref[r] == doctest::Approx(scalar_table().squared_distance(q.data(), data.data() + r * stride, dims)));
  if (const KernelTable* simd = avx2_table(); simd != nullptr && cpu_has_avx2()) {
    simd->squared_distances_to(q.data(), data.data(), dims, stride, rows, out_simd.data());
    for (std::size_t r = 0; r < rows; ++r) CHECK(std::abs(out_simd[r] - out_ref[r]) <= 1e-12);
  }
}
