/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "opf/bnb.hpp"
#include "opf/local.hpp"
#include "opf/qcqp.hpp"
#include "opf/qp.hpp"
#include "opf/sdp.hpp"

namespace opf {

enum class InputFormat { Auto, Matpower, Native };
enum class RunMode { Full, RootOnly, SdpOnly };

const char* to_string(RunMode m);

struct RunConfig {
  std::string input_path;
  InputFormat format = InputFormat::Auto;
  RunMode mode = RunMode::Full;
  QcqpOptions qcqp;
  SdpOptions sdp;
  QpOptions qp;
  LocalOptions local;
  BnbOptions bnb;
  std::string output_path;    // JSON report (empty: none)
  std::string sdp_dump_path;  // optional (X, alpha) dump
  int verbosity = 0;
};

struct CaseOutcome {
  int exit_code = 1;
  std::string case_name;
  std::string status;  // global_optimal / time_limit / infeasible / error:...
  double root_gap_pct = 0.0;
  double final_gap_pct = 0.0;
  double time_s = 0.0;
  long nodes = 0;
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  double root_bound = 0.0;
  double sdp_value = 0.0;  // with objective offset
  double sdp_relative_gap = 0.0;
  nlohmann::json report;
};

// parse -> lift -> SDP -> reformulation -> branch-and-bound (or a prefix of
// that pipeline per mode); writes the JSON report when configured.
// Exit code 0 on success/global optimality, 2 on time limit, 1 on error.
CaseOutcome run_case(const RunConfig& config);

struct BenchRow {
  std::string case_name;
  double root_gap_pct = 0.0;
  double final_gap_pct = 0.0;
  std::string final_gap_or_time;  // paper-style column: time when closed
  double time_s = 0.0;
  long nodes = 0;
  std::string status;
};

// Runs every recognized case file (*.m, *.json) in the directory, isolating
// per-case failures. Rows are ordered by case name. When csv_path/json_path
// are non-empty the table is also written there.
std::vector<BenchRow> run_bench(const std::string& corpus_dir, const RunConfig& base,
                                const std::string& csv_path = "",
                                const std::string& json_path = "");

// 100 * (ub - lb) / ub, clamped to 0 when the bounds agree to 1e-9 relative.
// Throws ZeroUpperBound when ub == 0.
double gap_percent(double ub, double lb);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace opf
