#pragma once

// Hot inner loops shared by the k-NN search, local PCA and the embedders.
// Every routine has a portable scalar reference and an AVX2/FMA variant; the
// variant is picked once at runtime from CPUID. Set HEMIPS_SIMD=scalar in the
// environment to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace hemips::kernels {

struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // out[i] = |query - rows[i*stride .. i*stride+n)|^2 for i in [0, count)
  void (*squared_distances_to)(const double* query, const double* rows, std::size_t n,
                               std::size_t stride, std::size_t count, double* out);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table() noexcept;
bool cpu_has_avx2() noexcept;

/// The table selected for this process.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace hemips::kernels
