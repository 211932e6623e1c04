/*
 * SPDX-License-Identifier: Apache-2.0
 */

// Times the serial reference kernels against their OpenMP variants on
// synthetic constraint sets shaped like lifted power-flow data.

#include <omp.h>

#include <cstdio>
#include <random>
#include <vector>

#include "opf/kernels.hpp"
#include "opf/sym_matrix.hpp"

using namespace opf;

namespace {

struct Synthetic {
  std::vector<SymSparse> mats;
  ConstraintPack pack;
  Matrix w;
  Vector x;
  kernels::CsrMatrix csr;
  Vector cx;
};

Synthetic make(int dim, int m, int nnz_per, std::mt19937& rng) {
  Synthetic s;
  std::uniform_int_distribution<int> pick(0, dim - 1);
  std::normal_distribution<double> val(0.0, 1.0);
  for (int k = 0; k < m; ++k) {
    SymSparse a(dim);
    for (int e = 0; e < nnz_per; ++e) {
      int i = pick(rng), j = pick(rng);
      a.add(std::min(i, j), std::max(i, j), val(rng));
    }
    a.compress();
    s.mats.push_back(std::move(a));
  }
  std::vector<const SymSparse*> ptrs;
  for (const auto& a : s.mats) ptrs.push_back(&a);
  s.pack = ConstraintPack::pack(ptrs);

  Matrix g = Matrix::Random(dim, dim);
  s.w = 0.5 * (g + g.transpose()) + dim * Matrix::Identity(dim, dim);
  s.x = Vector::Random(dim);

  std::vector<Triplet> trip;
  for (int r = 0; r < m; ++r)
    for (int e = 0; e < nnz_per; ++e) trip.push_back({r, pick(rng), val(rng)});
  s.csr = kernels::CsrMatrix::from_triplets(m, dim, trip);
  s.cx = Vector::Random(dim);
  return s;
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e99;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    f();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int dim = argc > 1 ? std::atoi(argv[1]) : 236;   // 2n for a 118-bus case
  int m = argc > 2 ? std::atoi(argv[2]) : 708;     // 6n constraints
  int nnz = argc > 3 ? std::atoi(argv[3]) : 24;

  std::mt19937 rng(7);
  Synthetic s = make(dim, m, nnz, rng);

  std::printf("dim=%d constraints=%d nnz/constraint=%d threads=%d\n", dim, m, nnz,
              omp_get_max_threads());
  std::printf("%-18s %12s %12s %8s\n", "kernel", "serial(ms)", "omp(ms)", "speedup");

  {
    Matrix out1, out2;
    double ts = time_best_of(3, [&] { kernels::schur_assemble_serial(s.pack, s.w, out1); });
    double tp = time_best_of(3, [&] { kernels::schur_assemble_omp(s.pack, s.w, out2); });
    std::printf("%-18s %12.3f %12.3f %7.2fx   max|diff|=%g\n", "schur_assemble",
                1e3 * ts, 1e3 * tp, ts / tp, (out1 - out2).cwiseAbs().maxCoeff());
  }
  {
    Vector o1, o2;
    double ts = time_best_of(5, [&] { kernels::quad_forms_serial(s.pack, s.x, o1); });
    double tp = time_best_of(5, [&] { kernels::quad_forms_omp(s.pack, s.x, o2); });
    std::printf("%-18s %12.3f %12.3f %7.2fx   max|diff|=%g\n", "quad_forms", 1e3 * ts,
                1e3 * tp, ts / tp, (o1 - o2).cwiseAbs().maxCoeff());
  }
  {
    Vector o1, o2;
    double ts = time_best_of(5, [&] { kernels::inner_products_serial(s.pack, s.w, o1); });
    double tp = time_best_of(5, [&] { kernels::inner_products_omp(s.pack, s.w, o2); });
    std::printf("%-18s %12.3f %12.3f %7.2fx   max|diff|=%g\n", "inner_products",
                1e3 * ts, 1e3 * tp, ts / tp, (o1 - o2).cwiseAbs().maxCoeff());
  }
  {
    Vector o1(m), o2(m);
    double ts = time_best_of(5, [&] {
      for (int r = 0; r < 50; ++r) kernels::csr_matvec_serial(s.csr, s.cx.data(), o1.data());
    });
    double tp = time_best_of(5, [&] {
      for (int r = 0; r < 50; ++r) kernels::csr_matvec_omp(s.csr, s.cx.data(), o2.data());
    });
    std::printf("%-18s %12.3f %12.3f %7.2fx   max|diff|=%g\n", "csr_matvec(x50)",
                1e3 * ts, 1e3 * tp, ts / tp, (o1 - o2).cwiseAbs().maxCoeff());
  }
  return 0;
}
