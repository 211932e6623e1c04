/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <vector>

#include "opf/sym_matrix.hpp"

namespace opf::kernels {

// Hot inner loops of the solvers. Every kernel has a serial reference
// implementation and an OpenMP variant; the OpenMP variant computes each
// output element with the identical inner loop, so results are bit-identical
// to the serial reference for any thread count. `parallel` picks the variant.

// General sparse matrix, compressed row storage.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> ptr;  // size rows+1
  std::vector<int> idx;
  std::vector<double> val;

  CsrMatrix transposed() const;
  static CsrMatrix from_triplets(int rows, int cols,
                                 std::vector<Triplet> triplets);
};

// out = A x
void csr_matvec_serial(const CsrMatrix& a, const double* x, double* out);
void csr_matvec_omp(const CsrMatrix& a, const double* x, double* out);
void csr_matvec(const CsrMatrix& a, const double* x, double* out, bool parallel);

// out[k] = x' A_k x for every constraint in the pack
void quad_forms_serial(const ConstraintPack& p, const Vector& x, Vector& out);
void quad_forms_omp(const ConstraintPack& p, const Vector& x, Vector& out);
void quad_forms(const ConstraintPack& p, const Vector& x, Vector& out, bool parallel);

// out[k] = <A_k, Y> for dense symmetric Y
void inner_products_serial(const ConstraintPack& p, const Matrix& y, Vector& out);
void inner_products_omp(const ConstraintPack& p, const Matrix& y, Vector& out);
void inner_products(const ConstraintPack& p, const Matrix& y, Vector& out, bool parallel);

// m(j,k) = tr(A_j W A_k W), the interior-point Schur complement. Only the
// upper triangle is computed; the lower is mirrored. W must be symmetric.
void schur_assemble_serial(const ConstraintPack& p, const Matrix& w, Matrix& m);
void schur_assemble_omp(const ConstraintPack& p, const Matrix& w, Matrix& m);
void schur_assemble(const ConstraintPack& p, const Matrix& w, Matrix& m, bool parallel);

}  // namespace opf::kernels
