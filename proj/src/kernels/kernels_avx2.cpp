// AVX2+FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatch table after a runtime CPU probe. A __m256d holds two complex
// doubles laid out as (re0, im0, re1, im1).

#include <immintrin.h>

#include <algorithm>

#include "flochern/kernels.hpp"

namespace flochern::kernels {
namespace {

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_swap = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
}

inline __m256d broadcast(cplx c) { return _mm256_setr_pd(c.real(), c.imag(), c.real(), c.imag()); }

void dia_apply_avx2(const DiaView& h, const cplx* x, cplx* y, cplx alpha) {
  const auto n = static_cast<std::ptrdiff_t>(h.n);
  std::fill(y, y + n, cplx{});
  for (std::size_t d = 0; d < h.num_diagonals; ++d) {
    const std::ptrdiff_t off = h.offsets[d];
    const cplx* diag = h.values + d * h.n;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - off);
    std::ptrdiff_t i = lo;
    for (; i + 1 < hi; i += 2) {
      store2(y + i, _mm256_add_pd(load2(y + i), cmul(load2(diag + i), load2(x + i + off))));
    }
    for (; i < hi; ++i) y[i] += diag[i] * x[i + off];
  }
  const __m256d a = broadcast(alpha);
  std::ptrdiff_t i = 0;
  for (; i + 1 < n; i += 2) store2(y + i, cmul(load2(y + i), a));
  for (; i < n; ++i) y[i] *= alpha;
}

void axpy_avx2(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  const __m256d a = broadcast(alpha);
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) store2(y + i, _mm256_add_pd(load2(y + i), cmul(load2(x + i), a)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpby_avx2(std::size_t n, const cplx* x, cplx beta, const cplx* y, cplx* out) {
  const __m256d b = broadcast(beta);
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) store2(out + i, _mm256_add_pd(load2(x + i), cmul(load2(y + i), b)));
  for (; i < n; ++i) out[i] = x[i] + beta * y[i];
}

cplx dotc_avx2(std::size_t n, const cplx* x, const cplx* y) {
  __m256d same = _mm256_setzero_pd();     // (xr*yr, xi*yi, ...)
  __m256d crossed = _mm256_setzero_pd();  // (xr*yi, xi*yr, ...)
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const __m256d xv = load2(x + i);
    const __m256d yv = load2(y + i);
    same = _mm256_fmadd_pd(xv, yv, same);
    crossed = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), crossed);
  }
  alignas(32) double s[4];
  alignas(32) double c[4];
  _mm256_store_pd(s, same);
  _mm256_store_pd(c, crossed);
  cplx acc{s[0] + s[1] + s[2] + s[3], (c[0] - c[1]) + (c[2] - c[3])};
  for (; i < n; ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", &dia_apply_avx2, &axpy_avx2, &xpby_avx2, &dotc_avx2};
  return table;
}

}  // namespace flochern::kernels
