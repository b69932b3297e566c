#include "mottsim/sparse_operator.hpp"

#include <algorithm>
#include <stdexcept>

namespace mottsim {

SparseOperator SparseOperator::from_triplets(std::size_t dim,
                                             std::vector<Triplet> triplets,
                                             bool hermitian) {
  for (const auto& t : triplets) {
    if (t.row >= dim || t.col >= dim)
      throw std::domain_error("SparseOperator: triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseOperator op;
  op.dim_ = dim;
  op.hermitian_ = hermitian;
  op.row_ptr_.assign(dim + 1, 0);

  std::size_t i = 0;
  for (std::size_t row = 0; row < dim; ++row) {
    while (i < triplets.size() && triplets[i].row == row) {
      const std::size_t col = triplets[i].col;
      Complex sum{0.0, 0.0};
      while (i < triplets.size() && triplets[i].row == row && triplets[i].col == col) {
        sum += triplets[i].value;
        ++i;
      }
      if (sum != Complex{0.0, 0.0}) {
        op.col_idx_.push_back(col);
        op.values_.push_back(sum);
      }
    }
    op.row_ptr_[row + 1] = op.values_.size();
  }
  return op;
}

void SparseOperator::apply(std::span<const Complex> x, std::span<Complex> y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw std::domain_error("SparseOperator::apply: dimension mismatch");
  for (std::size_t row = 0; row < dim_; ++row) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      acc += values_[k] * x[col_idx_[k]];
    y[row] = acc;
  }
}

void SparseOperator::apply_add(Complex alpha, std::span<const Complex> x,
                               std::span<Complex> y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw std::domain_error("SparseOperator::apply_add: dimension mismatch");
  for (std::size_t row = 0; row < dim_; ++row) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      acc += values_[k] * x[col_idx_[k]];
    y[row] += alpha * acc;
  }
}

bool SparseOperator::structurally_hermitian() const {
  for (std::size_t row = 0; row < dim_; ++row) {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) {
      const std::size_t col = col_idx_[k];
      // Binary search for (col, row).
      const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[col]);
      const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[col + 1]);
      const auto it = std::lower_bound(begin, end, row);
      if (it == end || *it != row) return false;
      const std::size_t mirror = static_cast<std::size_t>(it - col_idx_.begin());
      if (values_[mirror] != std::conj(values_[k])) return false;
    }
  }
  return true;
}

bool SparseOperator::is_diagonal() const {
  for (std::size_t row = 0; row < dim_; ++row)
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      if (col_idx_[k] != row) return false;
  return true;
}

std::vector<double> SparseOperator::real_diagonal() const {
  std::vector<double> d(dim_, 0.0);
  for (std::size_t row = 0; row < dim_; ++row)
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      if (col_idx_[k] == row) d[row] = values_[k].real();
  return d;
}

}  // namespace mottsim
