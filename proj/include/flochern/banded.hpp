#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flochern/kernels.hpp"
#include "flochern/types.hpp"

namespace flochern {

/// Square complex matrix in diagonal storage. Honeycomb strips and flakes in
/// the site orderings used here touch only a handful of diagonals, so this
/// is both the assembly target and the operand of the SIMD apply kernel.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  /// `offsets` need not be sorted; duplicates are rejected.
  BandedMatrix(std::size_t n, std::vector<int> offsets);

  std::size_t size() const { return n_; }
  std::span<const int> offsets() const { return offsets_; }
  std::size_t num_diagonals() const { return offsets_.size(); }

  /// Index into offsets() for `offset`, or -1.
  int slot_of(int offset) const;

  cplx& slot(std::size_t diagonal, std::size_t row) { return values_[diagonal * n_ + row]; }
  const cplx& slot(std::size_t diagonal, std::size_t row) const { return values_[diagonal * n_ + row]; }

  /// H(row, col) += value. Throws if the diagonal is not stored.
  void add(std::size_t row, std::size_t col, cplx value);
  cplx operator()(std::size_t row, std::size_t col) const;

  void set_zero();
  CMatrix to_dense() const;
  static BandedMatrix from_dense(const CMatrix& m);

  /// max_ij |H_ij - conj(H_ji)|
  double hermiticity_error() const;
  double max_abs() const;

  kernels::DiaView view() const { return {n_, offsets_.size(), offsets_.data(), values_.data()}; }

  /// y = alpha * H x using the active kernel table.
  void apply(const cplx* x, cplx* y, cplx alpha = 1.0) const;

 private:
  std::size_t n_ = 0;
  std::vector<int> offsets_;
  std::vector<cplx> values_;
};

}  // namespace flochern
