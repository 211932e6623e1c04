/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/reform.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "opf/errors.hpp"

namespace opf {

int Reformulation::pair_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(pair_set.begin(), pair_set.end(), std::make_pair(i, j));
  if (it == pair_set.end() || *it != std::make_pair(i, j)) return -1;
  return static_cast<int>(it - pair_set.begin());
}

Reformulation build_reformulation(const QcqpModel& model, const SdpResult& sdp) {
  if (sdp.status != SdpStatus::Optimal)
    throw NotOptimal("build_reformulation: SDP result is not optimal");
  const int dim = model.dim();
  const int m = static_cast<int>(model.constraints.size());
  if (sdp.duals.size() != m)
    throw DimensionMismatch("build_reformulation: dual length mismatch");

  Reformulation r;
  r.dim = dim;

  Matrix s = model.c_matrix.to_dense();
  for (int k = 0; k < m; ++k)
    for (const Triplet& t : model.constraints[k].a_matrix.entries())
      s(t.row, t.col) += sdp.duals[k] * t.value;
  s = 0.5 * (s + s.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  r.s_star_lambda_min = es.eigenvalues().minCoeff();
  if (r.s_star_lambda_min < -1e-6)
    throw NotPsdAfterShift("build_reformulation: lambda_min(S*) = " +
                           std::to_string(r.s_star_lambda_min) +
                           " below the repairable band");
  if (r.s_star_lambda_min < 0.0) {
    r.psd_shift = -r.s_star_lambda_min + 1e-9;
    s.diagonal().array() += r.psd_shift;
  }

  r.s_star = SymSparse::from_dense(s);

  // residual = C - S*, same arithmetic as the matrices above
  SymSparse residual(dim);
  Matrix res_dense = model.c_matrix.to_dense() - s;
  residual = SymSparse::from_dense(res_dense);
  r.residual = std::move(residual);

  // union sparsity of C and every A_k, diagonal always present
  std::set<std::pair<int, int>> pairs;
  for (int i = 0; i < dim; ++i) pairs.emplace(i, i);
  for (const Triplet& t : model.c_matrix.entries())
    pairs.emplace(std::min(t.row, t.col), std::max(t.row, t.col));
  for (int k = 0; k < m; ++k)
    for (const Triplet& t : model.constraints[k].a_matrix.entries())
      pairs.emplace(std::min(t.row, t.col), std::max(t.row, t.col));
  r.pair_set.assign(pairs.begin(), pairs.end());

  r.lower = model.lower;
  r.upper = model.upper;

  r.residual_pair_weights = Vector::Zero(static_cast<Eigen::Index>(r.pair_set.size()));
  for (const Triplet& t : r.residual.entries()) {
    if (t.row > t.col) continue;
    int e = r.pair_index(t.row, t.col);
    if (e < 0)
      throw MissingPair("build_reformulation: residual entry outside pair set");
    r.residual_pair_weights[e] = (t.row == t.col ? 1.0 : 2.0) * t.value;
  }
  return r;
}

double reformulated_objective(const Reformulation& r, const Vector& x, const Vector& y) {
  if (x.size() != r.dim || y.size() != static_cast<Eigen::Index>(r.pair_set.size()))
    throw DimensionMismatch("reformulated_objective: bad x or y length");
  return r.s_star.quad_form(x) + r.residual_pair_weights.dot(y);
}

double reformulated_objective(const Reformulation& r, const Vector& x,
                              const std::map<std::pair<int, int>, double>& y) {
  Vector yv = Vector::Zero(static_cast<Eigen::Index>(r.pair_set.size()));
  for (std::size_t e = 0; e < r.pair_set.size(); ++e) {
    auto it = y.find(r.pair_set[e]);
    if (it == y.end()) {
      if (r.residual_pair_weights[static_cast<Eigen::Index>(e)] != 0.0)
        throw MissingPair("reformulated_objective: no value for pair (" +
                          std::to_string(r.pair_set[e].first) + "," +
                          std::to_string(r.pair_set[e].second) + ")");
      continue;
    }
    yv[static_cast<Eigen::Index>(e)] = it->second;
  }
  return reformulated_objective(r, x, yv);
}

}  // namespace opf
