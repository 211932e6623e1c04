/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "opf/report.hpp"

namespace {

void add_common_options(CLI::App* cmd, opf::RunConfig& cfg, std::string& format,
                        std::string& mode) {
  cmd->add_option("--format", format, "input format: matpower|native|auto")
      ->envname("OPF_FORMAT")
      ->default_val("auto");
  cmd->add_option("--mode", mode, "pipeline mode: full|root-only|sdp-only")
      ->envname("OPF_MODE")
      ->default_val("full");
  cmd->add_option("--epsilon", cfg.bnb.epsilon, "final relative gap")
      ->envname("OPF_EPSILON");
  cmd->add_option("--delta", cfg.bnb.delta, "branching blend toward x_bar")
      ->envname("OPF_DELTA");
  cmd->add_option("--heuristic-period", cfg.bnb.heuristic_period,
                  "local solve every k-th node")
      ->envname("OPF_HEURISTIC_PERIOD");
  cmd->add_option("--time-limit", cfg.bnb.time_limit_seconds, "seconds")
      ->envname("OPF_TIME_LIMIT");
  cmd->add_option("--threads", cfg.bnb.threads, "branch-and-bound workers")
      ->envname("OPF_THREADS");
  cmd->add_option("--max-nodes", cfg.bnb.max_nodes, "node cap (0 = none)")
      ->envname("OPF_MAX_NODES");
  cmd->add_option("--sdp-max-iter", cfg.sdp.max_iterations)->envname("OPF_SDP_MAX_ITER");
  cmd->add_option("--sdp-tol", cfg.sdp.tolerance)->envname("OPF_SDP_TOL");
  cmd->add_flag("--sdp-serial", [&cfg](std::int64_t) { cfg.sdp.parallel = false; },
                "disable OpenMP kernels in the SDP solve");
  cmd->add_option("--qp-eps", cfg.qp.eps_abs, "QP absolute/relative tolerance")
      ->envname("OPF_QP_EPS");
  cmd->add_option("--qp-max-iter", cfg.qp.max_iterations)->envname("OPF_QP_MAX_ITER");
  cmd->add_flag("--no-warm-start", [&cfg](std::int64_t) { cfg.qp.warm_start = false; },
                "disable QP warm starts across nodes");
  cmd->add_option("--local-max-iter", cfg.local.max_iterations)
      ->envname("OPF_LOCAL_MAX_ITER");
  cmd->add_option("--feas-tol", cfg.local.feasibility_tol,
                  "heuristic feasibility tolerance")
      ->envname("OPF_FEAS_TOL");
  cmd->add_flag("--fix-angle", cfg.qcqp.fix_reference_angle,
                "pin the reference bus imaginary part to zero");
  cmd->add_option("--event-log", cfg.bnb.event_log_path, "per-node CSV event log");
  cmd->add_option("--sdp-dump", cfg.sdp_dump_path, "dump (X, alpha) JSON");
  cmd->add_option("-v,--verbose", cfg.verbosity, "verbosity level");
}

void apply_enums(opf::RunConfig& cfg, const std::string& format, const std::string& mode) {
  if (format == "matpower") cfg.format = opf::InputFormat::Matpower;
  else if (format == "native") cfg.format = opf::InputFormat::Native;
  else cfg.format = opf::InputFormat::Auto;
  if (mode == "root-only") cfg.mode = opf::RunMode::RootOnly;
  else if (mode == "sdp-only") cfg.mode = opf::RunMode::SdpOnly;
  else cfg.mode = opf::RunMode::Full;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"global AC optimal power flow via SDP-derived convex reformulation"};
  app.require_subcommand(1);

  opf::RunConfig cfg;
  std::string format = "auto", mode = "full";

  auto* solve_cmd = app.add_subcommand("solve", "solve one case to global optimality");
  solve_cmd->add_option("path", cfg.input_path, "case file")->required();
  solve_cmd->add_option("--out", cfg.output_path, "JSON report path")->envname("OPF_OUT");
  add_common_options(solve_cmd, cfg, format, mode);

  std::string corpus, csv_out, json_out;
  auto* bench_cmd = app.add_subcommand("bench", "run a corpus directory");
  bench_cmd->add_option("dir", corpus, "directory of case files")->required();
  bench_cmd->add_option("--csv", csv_out, "CSV output path")->envname("OPF_BENCH_CSV");
  bench_cmd->add_option("--json", json_out, "JSON output path")->envname("OPF_BENCH_JSON");
  add_common_options(bench_cmd, cfg, format, mode);

  CLI11_PARSE(app, argc, argv);
  apply_enums(cfg, format, mode);
  cfg.sdp.verbosity = cfg.verbosity;

  if (solve_cmd->parsed()) {
    opf::CaseOutcome oc = opf::run_case(cfg);
    if (oc.exit_code == 1 && oc.status.rfind("error", 0) == 0) {
      std::fprintf(stderr, "%s\n", oc.status.c_str());
      return 1;
    }
    std::printf("case %s  status %s\n", oc.case_name.c_str(), oc.status.c_str());
    if (oc.root_gap_pct >= 0.0) std::printf("  root gap   %.4f%%\n", oc.root_gap_pct);
    if (oc.final_gap_pct >= 0.0) std::printf("  final gap  %.6f%%\n", oc.final_gap_pct);
    if (oc.nodes > 0) std::printf("  nodes      %ld\n", oc.nodes);
    std::printf("  time       %.3fs\n", oc.time_s);
    return oc.exit_code;
  }

  // bench
  auto rows = opf::run_bench(corpus, cfg, csv_out, json_out);
  std::printf("%-14s %-12s %-14s %-8s %s\n", "case", "root_gap", "gap_or_time", "nodes",
              "status");
  for (const auto& r : rows) {
    char root[32];
    if (r.root_gap_pct >= 0.0)
      std::snprintf(root, sizeof root, "%.2f%%", r.root_gap_pct);
    else
      std::snprintf(root, sizeof root, "-");
    std::printf("%-14s %-12s %-14s %-8ld %s\n", r.case_name.c_str(), root,
                r.final_gap_or_time.c_str(), r.nodes, r.status.c_str());
  }
  return 0;
}
