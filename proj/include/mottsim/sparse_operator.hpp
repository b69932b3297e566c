#ifndef MOTTSIM_SPARSE_OPERATOR_HPP
#define MOTTSIM_SPARSE_OPERATOR_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "mottsim/linalg.hpp"

namespace mottsim {

struct Triplet {
  std::size_t row;
  std::size_t col;
  Complex value;
};

// Compressed-row complex sparse matrix. Column indices are strictly
// increasing within each row and exact zeros are dropped.
class SparseOperator {
 public:
  SparseOperator() = default;

  // Duplicate (row, col) entries are summed before compression.
  static SparseOperator from_triplets(std::size_t dim, std::vector<Triplet> triplets,
                                      bool hermitian);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }
  bool hermitian() const { return hermitian_; }

  // y = A x
  void apply(std::span<const Complex> x, std::span<Complex> y) const;
  // y += alpha * A * x
  void apply_add(Complex alpha, std::span<const Complex> x, std::span<Complex> y) const;

  // Entry-for-entry equality with the conjugate transpose.
  bool structurally_hermitian() const;

  bool is_diagonal() const;
  // Real parts of the diagonal entries (a Hermitian diagonal is real).
  std::vector<double> real_diagonal() const;

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<Complex>& values() const { return values_; }

 private:
  std::size_t dim_ = 0;
  bool hermitian_ = false;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<Complex> values_;
};

}  // namespace mottsim

#endif
