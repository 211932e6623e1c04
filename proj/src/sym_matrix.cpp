/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/sym_matrix.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace opf {

void SymSparse::add(int i, int j, double v) {
  assert(i >= 0 && i < dim_ && j >= 0 && j < dim_);
  if (v == 0.0) return;
  entries_.push_back({i, j, v});
  if (i != j) entries_.push_back({j, i, v});
  compressed_ = false;
}

void SymSparse::compress() {
  if (compressed_) return;
  std::sort(entries_.begin(), entries_.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Triplet> out;
  out.reserve(entries_.size());
  for (const Triplet& t : entries_) {
    if (!out.empty() && out.back().row == t.row && out.back().col == t.col) {
      out.back().value += t.value;
    } else {
      out.push_back(t);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const Triplet& t) { return t.value == 0.0; }),
            out.end());
  entries_ = std::move(out);
  compressed_ = true;
}

double SymSparse::quad_form(const Vector& x) const {
  assert(compressed_);
  double acc = 0.0;
  for (const Triplet& t : entries_) acc += t.value * x[t.row] * x[t.col];
  return acc;
}

double SymSparse::inner(const Matrix& y) const {
  assert(compressed_);
  double acc = 0.0;
  for (const Triplet& t : entries_) acc += t.value * y(t.row, t.col);
  return acc;
}

Vector SymSparse::multiply(const Vector& x) const {
  assert(compressed_);
  Vector out = Vector::Zero(dim_);
  for (const Triplet& t : entries_) out[t.row] += t.value * x[t.col];
  return out;
}

Matrix SymSparse::to_dense() const {
  Matrix m = Matrix::Zero(dim_, dim_);
  for (const Triplet& t : entries_) m(t.row, t.col) += t.value;
  return m;
}

std::vector<std::pair<int, int>> SymSparse::upper_pattern() const {
  std::vector<std::pair<int, int>> out;
  for (const Triplet& t : entries_)
    if (t.row <= t.col) out.emplace_back(t.row, t.col);
  return out;
}

double SymSparse::max_asymmetry() const { return 0.0; }

SymSparse SymSparse::from_dense(const Matrix& m, double drop_tol) {
  SymSparse s(static_cast<int>(m.rows()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j) {
      double v = 0.5 * (m(i, j) + m(j, i));
      if (std::abs(v) > drop_tol) s.add(i, j, v);
    }
  s.compress();
  return s;
}

SymSparse SymSparse::identity(int dim) {
  SymSparse s(dim);
  for (int i = 0; i < dim; ++i) s.add(i, i, 1.0);
  s.compress();
  return s;
}

SymSparse SymSparse::scaled(double t) const {
  SymSparse s(dim_);
  for (const Triplet& e : entries_)
    if (e.row <= e.col) s.add(e.row, e.col, t * e.value);
  s.compress();
  return s;
}

ConstraintPack ConstraintPack::pack(const std::vector<const SymSparse*>& mats) {
  ConstraintPack p;
  p.dim = mats.empty() ? 0 : mats.front()->dim();
  p.ptr.push_back(0);
  for (const SymSparse* m : mats) {
    for (const Triplet& t : m->entries()) {
      p.row.push_back(t.row);
      p.col.push_back(t.col);
      p.val.push_back(t.value);
    }
    p.ptr.push_back(static_cast<std::int64_t>(p.val.size()));
  }
  return p;
}

}  // namespace opf
