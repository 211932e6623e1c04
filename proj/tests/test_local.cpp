/*
 * SPDX-License-Identifier: Apache-2.0
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "opf/local.hpp"
#include "opf/matpower.hpp"
#include "opf/sdp.hpp"

using namespace opf;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

QcqpModel load(const std::string& name) {
  return build_qcqp(
      parse_matpower(read_file(std::string(OPF_DATA_DIR) + "/matpower/" + name)));
}

// analytic optimum of the two-bus fixture: x1 at its cap, x2 solving
// x2 (x1 - x2) = d with the positive root, co-phased voltages
Vector fixture2_optimum() {
  const double vmax = 1.05, d = 0.04;
  const double x2 = 0.5 * (vmax + std::sqrt(vmax * vmax - 4.0 * d));
  Vector x(4);
  x << vmax, x2, 0.0, 0.0;
  return x;
}

}  // namespace

TEST_CASE("start at the known optimum stays there") {
  QcqpModel m = load("fixture2.m");
  const Vector xstar = fixture2_optimum();
  const double fstar = m.c_matrix.quad_form(xstar);

  LocalPoint p = local_solve(m, xstar);
  REQUIRE(p.converged);
  CHECK(p.max_violation <= 1e-5);
  CHECK(std::abs(p.objective - fstar) <= 1e-6);
}

TEST_CASE("zero start never reports an infeasible point as converged") {
  QcqpModel m = load("fixture2.m");
  LocalPoint p = local_solve(m, Vector::Zero(4));
  if (p.converged) CHECK(p.max_violation <= 1e-5);
}

TEST_CASE("case9 flat start reaches the global optimum region") {
  QcqpModel m = load("case9.m");
  SdpResult sdp = solve_sdp(m);
  REQUIRE(sdp.status == SdpStatus::Optimal);

  LocalPoint p = local_solve(m, flat_start(m));
  REQUIRE(p.converged);
  CHECK(p.max_violation <= 1e-5);
  // the rank relaxation is tight on this case, so the SDP value is the
  // global optimum; the heuristic must land within 0.5% of it
  const double rel = (p.objective - sdp.primal_value) /
                     std::max(1.0, std::abs(sdp.primal_value));
  CHECK(rel >= -1e-6);  // never below a valid lower bound
  CHECK(rel <= 5e-3);
}

TEST_CASE("converged points always pass the feasibility evaluation") {
  QcqpModel m = load("fixture2.m");
  for (double scale : {0.5, 0.9, 1.1}) {
    Vector start = flat_start(m) * scale;
    LocalPoint p = local_solve(m, start);
    if (p.converged) {
      EvalResult ev = evaluate(m, p.x);
      CHECK(ev.max_violation <= 1e-5);
      CHECK(p.objective == doctest::Approx(ev.objective));
    }
  }
}

TEST_CASE("identical inputs give identical outputs") {
  QcqpModel m = load("case9.m");
  LocalPoint a = local_solve(m, flat_start(m));
  LocalPoint b = local_solve(m, flat_start(m));
  REQUIRE(a.converged == b.converged);
  CHECK(a.objective == b.objective);
  CHECK(a.max_violation == b.max_violation);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("wrong start length is reported, not thrown") {
  QcqpModel m = load("fixture2.m");
  LocalPoint p = local_solve(m, Vector::Zero(3));
  CHECK_FALSE(p.converged);
}
