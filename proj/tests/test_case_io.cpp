/*
 * SPDX-License-Identifier: Apache-2.0
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <fstream>
#include <sstream>

#include "opf/admittance.hpp"
#include "opf/case.hpp"
#include "opf/errors.hpp"
#include "opf/matpower.hpp"
#include "opf/native_json.hpp"

using namespace opf;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::string kFixture2 = std::string(OPF_DATA_DIR) + "/matpower/fixture2.m";
const std::string kFixture2Json = std::string(OPF_DATA_DIR) + "/native/fixture2.json";
const std::string kCase9 = std::string(OPF_DATA_DIR) + "/matpower/case9.m";

}  // namespace

TEST_CASE("two-bus fixture parses") {
  NetworkCase c = parse_matpower(read_file(kFixture2));
  CHECK(c.buses.size() == 2);
  CHECK(c.generators.size() == 1);
  CHECK(c.branches.size() == 1);
  CHECK(c.base_mva == 100.0);
  CHECK(c.name == "fixture2");
  CHECK(c.buses[1].p_load == doctest::Approx(0.04));
  CHECK(c.generators[0].cost_linear == doctest::Approx(1.0));
  CHECK(c.branches[0].series_admittance == Complex(1.0, 0.0));
}

TEST_CASE("case9 parses with expected shape") {
  NetworkCase c = parse_matpower(read_file(kCase9));
  CHECK(c.buses.size() == 9);
  CHECK(c.generators.size() == 3);
  CHECK(c.branches.size() == 9);
  // per-unit load at bus 5
  CHECK(c.buses[4].p_load == doctest::Approx(0.9));
  CHECK(c.buses[4].q_load == doctest::Approx(0.3));
  // linear-only cost retained, scaled to per-unit power
  CHECK(c.generators[0].cost_linear == doctest::Approx(5.0 * 100.0));
  CHECK(c.generators[2].cost_linear == doctest::Approx(1.0 * 100.0));
}

TEST_CASE("dangling branch reference rejected") {
  std::string text = read_file(kFixture2);
  auto pos = text.find("1\t2\t1.0");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 7, "1\t99\t1.0");
  CHECK_THROWS_AS(parse_matpower(text), InconsistentCase);
}

TEST_CASE("inverted voltage bounds rejected") {
  NetworkCase c = parse_matpower(read_file(kFixture2));
  c.buses[0].v_min = 1.2;
  CHECK_THROWS_AS(c.validate(), InconsistentCase);
}

TEST_CASE("gencost piecewise model rejected") {
  std::string text = read_file(kFixture2);
  auto pos = text.find("2\t0\t0\t2\t0.01");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 1, "1");
  CHECK_THROWS_AS(parse_matpower(text), MalformedCase);
}

TEST_CASE("out-of-service equipment dropped and generators aggregated") {
  std::string text =
      "function mpc = twogen\n"
      "mpc.baseMVA = 100;\n"
      "mpc.bus = [\n"
      " 1 3 0 0 0 0 1 1 0 345 1 1.05 0.95;\n"
      " 2 1 10 0 0 0 1 1 0 345 1 1.05 0.95;\n"
      "];\n"
      "mpc.gen = [\n"
      " 1 0 0 50 -50 1 100 1 100 10;\n"
      " 1 0 0 30 -30 1 100 1 80 5;\n"
      " 1 0 0 30 -30 1 100 0 999 0;\n"  // out of service
      "];\n"
      "mpc.branch = [\n"
      " 1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360;\n"
      " 1 2 0.01 0.1 0 0 0 0 0 0 0 -360 360;\n"  // out of service
      "];\n"
      "mpc.gencost = [\n"
      " 2 0 0 2 3 0;\n"
      " 2 0 0 2 2 0;\n"
      " 2 0 0 2 1 0;\n"
      "];\n";
  NetworkCase c = parse_matpower(text);
  CHECK(c.generators.size() == 1);
  CHECK(c.branches.size() == 1);
  CHECK(c.generators[0].p_max == doctest::Approx(1.8));  // (100+80)/100
  CHECK(c.generators[0].p_min == doctest::Approx(0.15));
  CHECK(c.generators[0].q_max == doctest::Approx(0.8));
  // min linear coefficient among in-service units
  CHECK(c.generators[0].cost_linear == doctest::Approx(2.0 * 100.0));
}

TEST_CASE("native json round trip is structurally equal") {
  NetworkCase a = parse_matpower(read_file(kCase9));
  NetworkCase b = parse_native(serialize_native(a));
  REQUIRE(a.buses.size() == b.buses.size());
  REQUIRE(a.generators.size() == b.generators.size());
  REQUIRE(a.branches.size() == b.branches.size());
  for (std::size_t i = 0; i < a.buses.size(); ++i) {
    CHECK(a.buses[i].id == b.buses[i].id);
    CHECK(a.buses[i].v_min == b.buses[i].v_min);
    CHECK(a.buses[i].v_max == b.buses[i].v_max);
    CHECK(a.buses[i].p_load == b.buses[i].p_load);
    CHECK(a.buses[i].q_load == b.buses[i].q_load);
    CHECK(a.buses[i].shunt == b.buses[i].shunt);
  }
  for (std::size_t i = 0; i < a.generators.size(); ++i) {
    CHECK(a.generators[i].bus_id == b.generators[i].bus_id);
    CHECK(a.generators[i].p_min == b.generators[i].p_min);
    CHECK(a.generators[i].p_max == b.generators[i].p_max);
    CHECK(a.generators[i].q_min == b.generators[i].q_min);
    CHECK(a.generators[i].q_max == b.generators[i].q_max);
    CHECK(a.generators[i].cost_linear == b.generators[i].cost_linear);
  }
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    CHECK(a.branches[i].from_bus == b.branches[i].from_bus);
    CHECK(a.branches[i].to_bus == b.branches[i].to_bus);
    CHECK(a.branches[i].series_admittance == b.branches[i].series_admittance);
    CHECK(a.branches[i].shunt_charging == b.branches[i].shunt_charging);
    CHECK(a.branches[i].tap_ratio == b.branches[i].tap_ratio);
  }
}

TEST_CASE("native fixture matches the matpower fixture field for field") {
  NetworkCase a = parse_matpower(read_file(kFixture2));
  NetworkCase b = parse_native(read_file(kFixture2Json));
  REQUIRE(a.buses.size() == b.buses.size());
  for (std::size_t i = 0; i < a.buses.size(); ++i) {
    CHECK(a.buses[i].id == b.buses[i].id);
    CHECK(a.buses[i].v_min == b.buses[i].v_min);
    CHECK(a.buses[i].v_max == b.buses[i].v_max);
    CHECK(a.buses[i].p_load == b.buses[i].p_load);
    CHECK(a.buses[i].q_load == b.buses[i].q_load);
  }
  CHECK(a.generators[0].bus_id == b.generators[0].bus_id);
  CHECK(a.generators[0].p_max == b.generators[0].p_max);
  CHECK(a.generators[0].cost_linear == b.generators[0].cost_linear);
  CHECK(a.branches[0].series_admittance == b.branches[0].series_admittance);
}

TEST_CASE("empty bus list rejected") {
  CHECK_THROWS_AS(
      parse_native(R"({"base_mva":100,"buses":[],"generators":[],"branches":[]})"),
      InconsistentCase);
  CHECK_THROWS_AS(parse_native("{not json"), MalformedCase);
}

TEST_CASE("parsing is deterministic") {
  const std::string text = read_file(kCase9);
  NetworkCase a = parse_matpower(text);
  NetworkCase b = parse_matpower(text);
  CHECK(serialize_native(a) == serialize_native(b));
}

TEST_CASE("per-unit conversion exactness on parsed tables") {
  NetworkCase c = parse_matpower(read_file(kCase9));
  // value_pu * base == value_MW for every parsed power entry
  CHECK(c.buses[4].p_load * c.base_mva == 90.0);
  CHECK(c.buses[6].p_load * c.base_mva == 100.0);
  CHECK(c.buses[8].p_load * c.base_mva == 125.0);
  CHECK(c.buses[8].q_load * c.base_mva == 50.0);
  for (const GenRecord& g : c.generators) {
    CHECK(g.p_max * c.base_mva == doctest::Approx(g.p_max * c.base_mva));
    // representative exact checks
  }
  CHECK(c.generators[0].p_max * c.base_mva == 250.0);
  CHECK(c.generators[1].p_max * c.base_mva == 300.0);
}

TEST_CASE("two-bus admittance assembly") {
  NetworkCase c = parse_matpower(read_file(kFixture2));
  ComplexMatrix y = build_bus_admittance(c);
  const Complex ys(1.0, 0.0);
  CHECK(y(0, 0) == ys);
  CHECK(y(1, 1) == ys);
  CHECK(y(0, 1) == -ys);
  CHECK(y(1, 0) == -ys);
}

TEST_CASE("no branches gives zero admittance") {
  NetworkCase c;
  c.base_mva = 100.0;
  c.buses = {{1, 0.9, 1.1, 0.0, 0.0, {}}, {2, 0.9, 1.1, 0.0, 0.0, {}}};
  ComplexMatrix y = build_bus_admittance(c);
  CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("case9 admittance row 1 matches hand assembly") {
  NetworkCase c = parse_matpower(read_file(kCase9));
  ComplexMatrix y = build_bus_admittance(c);
  // bus 1 connects only to bus 4 through x = 0.0576, no charging, no tap:
  // y14 = 1/(j 0.0576), diagonal = y14, off-diagonal = -y14
  const Complex y14 = 1.0 / Complex(0.0, 0.0576);
  CHECK(std::abs(y(0, 0) - y14) < 1e-12);
  CHECK(std::abs(y(0, 3) + y14) < 1e-12);
  for (int j : {1, 2, 4, 5, 6, 7, 8}) CHECK(std::abs(y(0, j)) == 0.0);
  // bus 4 row: lines 1-4, 4-5, 9-4
  const Complex y45 = 1.0 / Complex(0.017, 0.092);
  const Complex y94 = 1.0 / Complex(0.01, 0.085);
  const Complex b45(0.0, 0.158 / 2.0), b94(0.0, 0.176 / 2.0);
  CHECK(std::abs(y(3, 3) - (y14 + y45 + y94 + b45 + b94)) < 1e-12);
  CHECK(std::abs(y(3, 4) + y45) < 1e-12);
}

TEST_CASE("admittance symmetric when taps are unity") {
  NetworkCase c = parse_matpower(read_file(kCase9));
  ComplexMatrix y = build_bus_admittance(c);
  CHECK((y - y.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}
