#pragma once

// Complex-double inner loops of the propagator pipeline.
//
// Every kernel exists as a scalar reference implementation and, on x86-64,
// as an AVX2+FMA variant. `active()` returns the table picked at first use
// from a CPU feature probe; FLOCHERN_SIMD=scalar in the environment forces
// the reference path. The two tables are equivalence-tested against each
// other in tests/unit/test_kernels.cpp.

#include <complex>
#include <cstddef>
#include <string_view>

namespace flochern::kernels {

using cplx = std::complex<double>;

/// Diagonal-storage (DIA) view of a square matrix. Diagonal `d` holds
/// entries H(i, i + offsets[d]) at position `d * n + i`; slots that fall
/// outside the matrix are zero and never read.
struct DiaView {
  std::size_t n = 0;
  std::size_t num_diagonals = 0;
  const int* offsets = nullptr;
  const cplx* values = nullptr;
};

struct KernelTable {
  std::string_view name;
  /// y = alpha * H x
  void (*dia_apply)(const DiaView& h, const cplx* x, cplx* y, cplx alpha);
  /// y += alpha * x
  void (*axpy)(std::size_t n, cplx alpha, const cplx* x, cplx* y);
  /// out = x + beta * y
  void (*xpby)(std::size_t n, const cplx* x, cplx beta, const cplx* y, cplx* out);
  /// sum_i conj(x_i) y_i
  cplx (*dotc)(std::size_t n, const cplx* x, const cplx* y);
};

const KernelTable& scalar();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks
/// AVX2/FMA.
const KernelTable* avx2();

const KernelTable& active();

}  // namespace flochern::kernels
