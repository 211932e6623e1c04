/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace opf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One entry of a sparse symmetric matrix.
struct Triplet {
  int row;
  int col;
  double value;
};

// Sparse real symmetric matrix stored as a full (both halves) triplet list,
// sorted row-major with duplicates combined. Storing both halves keeps the
// quadratic-form and inner-product loops branch-free, which is what the hot
// kernels want.
class SymSparse {
 public:
  SymSparse() = default;
  explicit SymSparse(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  const std::vector<Triplet>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  // Accumulates m(i,j) += v and, when i != j, m(j,i) += v.
  void add(int i, int j, double v);

  // Sorts row-major and combines duplicates. Must be called after the last
  // add() and before any evaluation. Entries that cancel to exactly zero are
  // dropped.
  void compress();

  double quad_form(const Vector& x) const;          // x' M x
  double inner(const Matrix& y) const;              // <M, Y>
  Vector multiply(const Vector& x) const;           // M x
  Matrix to_dense() const;

  // Upper-triangle (i <= j) sparsity pattern.
  std::vector<std::pair<int, int>> upper_pattern() const;

  double max_asymmetry() const;                     // always 0 by construction
  static SymSparse from_dense(const Matrix& m, double drop_tol = 0.0);
  static SymSparse identity(int dim);

  SymSparse scaled(double t) const;

 private:
  int dim_ = 0;
  bool compressed_ = true;
  std::vector<Triplet> entries_;
};

// Flattened constraint-set view used by the kernels: all constraint matrices
// concatenated CSR-style.
struct ConstraintPack {
  int dim = 0;                     // matrix dimension (2n)
  std::vector<std::int64_t> ptr;   // size m+1; entry range of constraint k
  std::vector<int> row;
  std::vector<int> col;
  std::vector<double> val;

  int count() const { return static_cast<int>(ptr.size()) - 1; }
  static ConstraintPack pack(const std::vector<const SymSparse*>& mats);
};

}  // namespace opf
