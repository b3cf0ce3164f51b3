#include "hemips/kernels.hpp"

namespace hemips::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sqdist_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void sqdist_rows_scalar(const double* query, const double* rows, std::size_t n,
                        std::size_t stride, std::size_t count, double* out) {
  for (std::size_t r = 0; r < count; ++r) out[r] = sqdist_scalar(query, rows + r * stride, n);
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar", &dot_scalar, &sqdist_scalar, &sqdist_rows_scalar};
  return table;
}

}  // namespace hemips::kernels
