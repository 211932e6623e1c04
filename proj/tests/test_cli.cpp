/*
 * SPDX-License-Identifier: Apache-2.0
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "opf/errors.hpp"
#include "opf/report.hpp"

using namespace opf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kData = OPF_DATA_DIR;
const std::string kCli = OPF_CLI_PATH;

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("opf_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("gap arithmetic") {
  CHECK(gap_percent(100.0, 97.8) == doctest::Approx(2.2));
  CHECK(gap_percent(5.0, 5.0) == 0.0);
  CHECK(gap_percent(100.0, 83.3) == doctest::Approx(16.7));
  CHECK(gap_percent(1.0, 1.0 - 1e-12) == 0.0);  // clamp below rounding
  CHECK_THROWS_AS(gap_percent(0.0, -1.0), ZeroUpperBound);
}

TEST_CASE("sdp-only mode reports a closed sdp gap") {
  RunConfig cfg;
  cfg.input_path = kData + "/matpower/case9.m";
  cfg.mode = RunMode::SdpOnly;
  CaseOutcome oc = run_case(cfg);
  REQUIRE(oc.exit_code == 0);
  CHECK(oc.report["sdp"]["duality_gap"].get<double>() <= 1e-6);
  CHECK(oc.report["sdp"]["status"] == "optimal");
}

TEST_CASE("root-only mode on case14 shows a zero root gap") {
  RunConfig cfg;
  cfg.input_path = kData + "/matpower/case14.m";
  cfg.mode = RunMode::RootOnly;
  CaseOutcome oc = run_case(cfg);
  REQUIRE(oc.exit_code == 0);
  CHECK(oc.root_gap_pct >= 0.0);
  CHECK(oc.root_gap_pct <= 0.05);  // table row: 0% within rounding
  CHECK(oc.report["root"]["sdp_root_match_rel"].get<double>() <= 1e-5);
}

TEST_CASE("missing input gives exit 1 and no partial output") {
  const fs::path dir = temp_dir("missing");
  RunConfig cfg;
  cfg.input_path = (dir / "nope.m").string();
  cfg.output_path = (dir / "report.json").string();
  CaseOutcome oc = run_case(cfg);
  CHECK(oc.exit_code == 1);
  CHECK_FALSE(fs::exists(cfg.output_path));
}

TEST_CASE("full mode writes a self-contained report") {
  const fs::path dir = temp_dir("full");
  RunConfig cfg;
  cfg.input_path = kData + "/matpower/fixture2.m";
  cfg.output_path = (dir / "report.json").string();
  CaseOutcome oc = run_case(cfg);
  REQUIRE(oc.exit_code == 0);
  REQUIRE(fs::exists(cfg.output_path));

  json rep;
  std::ifstream(cfg.output_path) >> rep;
  CHECK(rep["schema_version"] == 1);
  CHECK(rep["case"] == "fixture2");
  CHECK(rep["phases"].contains("sdp_s"));

  // re-run from the recorded config: bounds must reproduce
  RunConfig cfg2;
  cfg2.input_path = rep["input"]["path"].get<std::string>();
  cfg2.bnb.epsilon = rep["config"]["bnb"]["epsilon"].get<double>();
  cfg2.bnb.delta = rep["config"]["bnb"]["delta"].get<double>();
  cfg2.bnb.heuristic_period = rep["config"]["bnb"]["heuristic_period"].get<int>();
  cfg2.bnb.threads = rep["config"]["bnb"]["threads"].get<int>();
  CaseOutcome oc2 = run_case(cfg2);
  REQUIRE(oc2.exit_code == 0);
  CHECK(oc2.upper_bound ==
        doctest::Approx(rep["bounds"]["upper"].get<double>()).epsilon(1e-9));
  CHECK(oc2.lower_bound ==
        doctest::Approx(rep["bounds"]["lower"].get<double>()).epsilon(1e-6));
}

TEST_CASE("root-only and full mode share the root bound code path") {
  RunConfig root_cfg;
  root_cfg.input_path = kData + "/matpower/fixture2.m";
  root_cfg.mode = RunMode::RootOnly;
  CaseOutcome a = run_case(root_cfg);
  REQUIRE(a.exit_code == 0);

  RunConfig full_cfg = root_cfg;
  full_cfg.mode = RunMode::Full;
  CaseOutcome b = run_case(full_cfg);
  REQUIRE(b.exit_code == 0);
  CHECK(a.root_bound == b.root_bound);
}

TEST_CASE("bench isolates corrupt cases and orders rows by name") {
  const fs::path dir = temp_dir("bench");
  fs::copy_file(kData + "/matpower/fixture2.m", dir / "fixture2.m");
  fs::copy_file(kData + "/archive/lmbm3.m", dir / "lmbm3.m");
  std::ofstream(dir / "broken.m") << "function mpc = broken\n nonsense [\n";

  RunConfig cfg;
  const std::string csv = (dir / "out.csv").string();
  auto rows = run_bench(dir.string(), cfg, csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].case_name == "broken");
  CHECK(rows[1].case_name == "fixture2");
  CHECK(rows[2].case_name == "lmbm3");
  CHECK(rows[0].status.rfind("error", 0) == 0);
  CHECK(rows[1].status == "global_optimal");
  CHECK(rows[2].status == "global_optimal");

  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "case,root_gap_pct,final_gap_pct,time_s,nodes,status");
}

TEST_CASE("bench on an empty corpus returns an empty table") {
  const fs::path dir = temp_dir("empty");
  RunConfig cfg;
  auto rows = run_bench(dir.string(), cfg);
  CHECK(rows.empty());
}

TEST_CASE("cli: solve exit codes and report file") {
  const fs::path dir = temp_dir("cli");
  const std::string out = (dir / "r.json").string();
  CHECK(run_cli("solve " + kData + "/matpower/fixture2.m --out " + out) == 0);
  CHECK(fs::exists(out));
  CHECK(run_cli("solve " + (dir / "missing.m").string()) == 1);
  CHECK(run_cli("solve " + kData + "/native/fixture2.json --format native --mode sdp-only") == 0);
}

TEST_CASE("cli: bench runs a directory") {
  const fs::path dir = temp_dir("clibench");
  fs::copy_file(kData + "/matpower/fixture2.m", dir / "fixture2.m");
  const std::string csv = (dir / "table.csv").string();
  CHECK(run_cli("bench " + dir.string() + " --csv " + csv) == 0);
  CHECK(fs::exists(csv));
}

TEST_CASE("cli: hitting the time limit surfaces as exit code 2") {
  const int rc = run_cli("solve " + kData + "/matpower/case9.m --time-limit 1e-4");
  CHECK(rc == 2);
}
