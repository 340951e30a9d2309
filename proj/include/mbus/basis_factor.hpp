#pragma once

#include <vector>

namespace mbus::solver {

struct SparseColumn {
  std::vector<int> index;
  std::vector<double> value;
};

// Sparse LU of a simplex basis (Markowitz pivoting with a threshold test),
// plus a product-form eta file for the column replacements made between
// refactorizations.
//
// Index spaces: the basis is m x m with rows = constraint rows and columns =
// basis positions. ftran() maps a row-indexed right-hand side to a
// position-indexed solution of B x = b; btran() maps a position-indexed
// right-hand side to a row-indexed solution of B^T y = d.
class BasisFactor {
 public:
  struct Deficiency {
    std::vector<int> positions;  // basis positions that could not be pivoted
    std::vector<int> rows;       // rows left without a pivot, same length
    bool empty() const { return positions.empty(); }
  };

  Deficiency factorize(int m, const std::vector<SparseColumn>& columns);

  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;

  // Replaces the column at `position`; `column` is the ftran'd entering
  // column (position-indexed).
  void update(int position, const std::vector<double>& column);

  int num_updates() const { return static_cast<int>(eta_pivot_pos_.size()); }
  int dimension() const { return m_; }

 private:
  int m_ = 0;

  // L as row operations: for step k, v[l_index] -= l_value * v[l_row_[k]].
  std::vector<int> l_row_;
  std::vector<int> l_start_;
  std::vector<int> l_index_;
  std::vector<double> l_value_;

  // U by pivot step: pivot row/col/value and the off-diagonal entries of the
  // pivot row (column = basis position).
  std::vector<int> u_row_;
  std::vector<int> u_col_;
  std::vector<double> u_pivot_;
  std::vector<int> u_start_;
  std::vector<int> u_index_;
  std::vector<double> u_value_;

  std::vector<int> eta_pivot_pos_;
  std::vector<double> eta_pivot_val_;
  std::vector<int> eta_start_;
  std::vector<int> eta_index_;
  std::vector<double> eta_value_;

  mutable std::vector<double> work_;
};

}  // namespace mbus::solver
