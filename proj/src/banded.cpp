#include "flochern/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flochern {

double Vec2::norm() const { return std::hypot(x, y); }

BandedMatrix::BandedMatrix(std::size_t n, std::vector<int> offsets)
    : n_(n), offsets_(std::move(offsets)), values_(offsets_.size() * n) {
  std::vector<int> sorted = offsets_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("BandedMatrix: duplicate diagonal offset");
  }
  for (int off : offsets_) {
    if (static_cast<std::size_t>(std::abs(off)) >= std::max<std::size_t>(n, 1)) {
      throw std::invalid_argument("BandedMatrix: offset outside matrix");
    }
  }
}

int BandedMatrix::slot_of(int offset) const {
  const auto it = std::find(offsets_.begin(), offsets_.end(), offset);
  return it == offsets_.end() ? -1 : static_cast<int>(it - offsets_.begin());
}

void BandedMatrix::add(std::size_t row, std::size_t col, cplx value) {
  const int s = slot_of(static_cast<int>(col) - static_cast<int>(row));
  if (s < 0) throw std::out_of_range("BandedMatrix::add: diagonal not stored");
  slot(static_cast<std::size_t>(s), row) += value;
}

cplx BandedMatrix::operator()(std::size_t row, std::size_t col) const {
  const int s = slot_of(static_cast<int>(col) - static_cast<int>(row));
  return s < 0 ? cplx{} : slot(static_cast<std::size_t>(s), row);
}

void BandedMatrix::set_zero() { std::fill(values_.begin(), values_.end(), cplx{}); }

CMatrix BandedMatrix::to_dense() const {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    const long off = offsets_[d];
    for (std::size_t i = 0; i < n_; ++i) {
      const long j = static_cast<long>(i) + off;
      if (j < 0 || j >= static_cast<long>(n_)) continue;
      m(static_cast<Eigen::Index>(i), j) = slot(d, i);
    }
  }
  return m;
}

BandedMatrix BandedMatrix::from_dense(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("from_dense: matrix not square");
  const long n = m.rows();
  std::vector<int> offsets;
  for (long off = -(n - 1); off <= n - 1; ++off) {
    bool nonzero = false;
    for (long i = std::max(0L, -off); i < std::min(n, n - off) && !nonzero; ++i) {
      nonzero = m(i, i + off) != cplx{};
    }
    if (nonzero || off == 0) offsets.push_back(static_cast<int>(off));
  }
  BandedMatrix b(static_cast<std::size_t>(n), offsets);
  for (std::size_t d = 0; d < offsets.size(); ++d) {
    const long off = offsets[d];
    for (long i = std::max(0L, -off); i < std::min(n, n - off); ++i) {
      b.slot(d, static_cast<std::size_t>(i)) = m(i, i + off);
    }
  }
  return b;
}

double BandedMatrix::hermiticity_error() const {
  double err = 0.0;
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    const long off = offsets_[d];
    for (std::size_t i = 0; i < n_; ++i) {
      const long j = static_cast<long>(i) + off;
      if (j < 0 || j >= static_cast<long>(n_)) continue;
      err = std::max(err, std::abs(slot(d, i) - std::conj((*this)(static_cast<std::size_t>(j), i))));
    }
  }
  return err;
}

double BandedMatrix::max_abs() const {
  double m = 0.0;
  for (const cplx& v : values_) m = std::max(m, std::abs(v));
  return m;
}

void BandedMatrix::apply(const cplx* x, cplx* y, cplx alpha) const {
  kernels::active().dia_apply(view(), x, y, alpha);
}

}  // namespace flochern
