#include "flochern/kernels.hpp"

#include <algorithm>

namespace flochern::kernels {
namespace {

void dia_apply_scalar(const DiaView& h, const cplx* x, cplx* y, cplx alpha) {
  const auto n = static_cast<std::ptrdiff_t>(h.n);
  std::fill(y, y + n, cplx{});
  for (std::size_t d = 0; d < h.num_diagonals; ++d) {
    const std::ptrdiff_t off = h.offsets[d];
    const cplx* diag = h.values + d * h.n;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - off);
    for (std::ptrdiff_t i = lo; i < hi; ++i) y[i] += diag[i] * x[i + off];
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] *= alpha;
}

void axpy_scalar(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby_scalar(std::size_t n, const cplx* x, cplx beta, const cplx* y, cplx* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + beta * y[i];
}

cplx dotc_scalar(std::size_t n, const cplx* x, const cplx* y) {
  cplx acc{};
  for (std::size_t i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", &dia_apply_scalar, &axpy_scalar, &xpby_scalar,
                                 &dotc_scalar};
  return table;
}

}  // namespace flochern::kernels
