/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/kernels.hpp"

#include <algorithm>
#include <cassert>

namespace opf::kernels {

CsrMatrix CsrMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(val.size());
  for (int i = 0; i < rows; ++i)
    for (std::int64_t k = ptr[i]; k < ptr[i + 1]; ++k)
      t.push_back({idx[k], i, val[k]});
  return from_triplets(cols, rows, std::move(t));
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.ptr.assign(rows + 1, 0);
  int last_row = -1, last_col = -1;
  for (const Triplet& t : triplets) {
    assert(t.row >= 0 && t.row < rows && t.col >= 0 && t.col < cols);
    if (t.row == last_row && t.col == last_col) {
      m.val.back() += t.value;
      continue;
    }
    m.idx.push_back(t.col);
    m.val.push_back(t.value);
    m.ptr[t.row + 1] = static_cast<std::int64_t>(m.val.size());
    last_row = t.row;
    last_col = t.col;
  }
  // forward-fill row pointers for empty rows
  for (int i = 1; i <= rows; ++i) m.ptr[i] = std::max(m.ptr[i], m.ptr[i - 1]);
  return m;
}

namespace {

inline double row_dot(const CsrMatrix& a, const double* x, int i) {
  double acc = 0.0;
  for (std::int64_t k = a.ptr[i]; k < a.ptr[i + 1]; ++k) acc += a.val[k] * x[a.idx[k]];
  return acc;
}

inline double one_quad_form(const ConstraintPack& p, const Vector& x, int k) {
  double acc = 0.0;
  for (std::int64_t e = p.ptr[k]; e < p.ptr[k + 1]; ++e)
    acc += p.val[e] * x[p.row[e]] * x[p.col[e]];
  return acc;
}

inline double one_inner(const ConstraintPack& p, const Matrix& y, int k) {
  double acc = 0.0;
  for (std::int64_t e = p.ptr[k]; e < p.ptr[k + 1]; ++e)
    acc += p.val[e] * y(p.row[e], p.col[e]);
  return acc;
}

// tr(A_j W A_k W) expanded over the sparse entries of both constraints
inline double one_schur(const ConstraintPack& p, const Matrix& w, int j, int k) {
  double acc = 0.0;
  for (std::int64_t a = p.ptr[j]; a < p.ptr[j + 1]; ++a) {
    const int pa = p.row[a], qa = p.col[a];
    const double va = p.val[a];
    double inner = 0.0;
    for (std::int64_t b = p.ptr[k]; b < p.ptr[k + 1]; ++b)
      inner += p.val[b] * w(qa, p.row[b]) * w(p.col[b], pa);
    acc += va * inner;
  }
  return acc;
}

}  // namespace

void csr_matvec_serial(const CsrMatrix& a, const double* x, double* out) {
  for (int i = 0; i < a.rows; ++i) out[i] = row_dot(a, x, i);
}

void csr_matvec_omp(const CsrMatrix& a, const double* x, double* out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) out[i] = row_dot(a, x, i);
}

void csr_matvec(const CsrMatrix& a, const double* x, double* out, bool parallel) {
  if (parallel)
    csr_matvec_omp(a, x, out);
  else
    csr_matvec_serial(a, x, out);
}

void quad_forms_serial(const ConstraintPack& p, const Vector& x, Vector& out) {
  const int m = p.count();
  out.resize(m);
  for (int k = 0; k < m; ++k) out[k] = one_quad_form(p, x, k);
}

void quad_forms_omp(const ConstraintPack& p, const Vector& x, Vector& out) {
  const int m = p.count();
  out.resize(m);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < m; ++k) out[k] = one_quad_form(p, x, k);
}

void quad_forms(const ConstraintPack& p, const Vector& x, Vector& out, bool parallel) {
  if (parallel)
    quad_forms_omp(p, x, out);
  else
    quad_forms_serial(p, x, out);
}

void inner_products_serial(const ConstraintPack& p, const Matrix& y, Vector& out) {
  const int m = p.count();
  out.resize(m);
  for (int k = 0; k < m; ++k) out[k] = one_inner(p, y, k);
}

void inner_products_omp(const ConstraintPack& p, const Matrix& y, Vector& out) {
  const int m = p.count();
  out.resize(m);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < m; ++k) out[k] = one_inner(p, y, k);
}

void inner_products(const ConstraintPack& p, const Matrix& y, Vector& out, bool parallel) {
  if (parallel)
    inner_products_omp(p, y, out);
  else
    inner_products_serial(p, y, out);
}

void schur_assemble_serial(const ConstraintPack& p, const Matrix& w, Matrix& m) {
  const int n = p.count();
  m.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      const double v = one_schur(p, w, j, k);
      m(j, k) = v;
      m(k, j) = v;
    }
}

void schur_assemble_omp(const ConstraintPack& p, const Matrix& w, Matrix& m) {
  const int n = p.count();
  m.resize(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) m(j, k) = one_schur(p, w, j, k);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) m(k, j) = m(j, k);
}

void schur_assemble(const ConstraintPack& p, const Matrix& w, Matrix& m, bool parallel) {
  if (parallel)
    schur_assemble_omp(p, w, m);
  else
    schur_assemble_serial(p, w, m);
}

}  // namespace opf::kernels
