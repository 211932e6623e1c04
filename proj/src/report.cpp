/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "opf/errors.hpp"
#include "opf/matpower.hpp"
#include "opf/native_json.hpp"
#include "opf/reform.hpp"

namespace opf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json fin(double v) {
  if (std::isfinite(v)) return json(v);
  return json(nullptr);
}

double now_between(const std::chrono::steady_clock::time_point& a,
                   const std::chrono::steady_clock::time_point& b) {
  return std::chrono::duration<double>(b - a).count();
}

json config_json(const RunConfig& c) {
  return json{
      {"mode", to_string(c.mode)},
      {"fix_reference_angle", c.qcqp.fix_reference_angle},
      {"sdp",
       {{"max_iterations", c.sdp.max_iterations},
        {"tolerance", c.sdp.tolerance},
        {"accept_tolerance", c.sdp.accept_tolerance},
        {"parallel", c.sdp.parallel}}},
      {"qp",
       {{"eps_abs", c.qp.eps_abs},
        {"eps_rel", c.qp.eps_rel},
        {"max_iterations", c.qp.max_iterations},
        {"warm_start", c.qp.warm_start},
        {"polish", c.qp.polish}}},
      {"local",
       {{"max_iterations", c.local.max_iterations},
        {"feasibility_tol", c.local.feasibility_tol},
        {"kkt_tol", c.local.kkt_tol}}},
      {"bnb",
       {{"epsilon", c.bnb.epsilon},
        {"delta", c.bnb.delta},
        {"heuristic_period", c.bnb.heuristic_period},
        {"time_limit_seconds", c.bnb.time_limit_seconds},
        {"threads", c.bnb.threads},
        {"max_nodes", c.bnb.max_nodes}}},
  };
}

std::string detect_and_read(const RunConfig& config, NetworkCase& out) {
  if (!fs::exists(config.input_path)) return "input file not found: " + config.input_path;
  std::ifstream in(config.input_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  InputFormat f = config.format;
  if (f == InputFormat::Auto) {
    const std::string ext = fs::path(config.input_path).extension().string();
    f = ext == ".json" ? InputFormat::Native : InputFormat::Matpower;
  }
  try {
    out = f == InputFormat::Native ? parse_native(text) : parse_matpower(text);
  } catch (const std::exception& e) {
    return e.what();
  }
  if (out.name.empty()) out.name = fs::path(config.input_path).stem().string();
  return "";
}

}  // namespace

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Full: return "full";
    case RunMode::RootOnly: return "root-only";
    case RunMode::SdpOnly: return "sdp-only";
  }
  return "unknown";
}

double gap_percent(double ub, double lb) {
  if (ub == 0.0) throw ZeroUpperBound("gap: upper bound is zero");
  if (std::abs(ub - lb) <= 1e-9 * std::abs(ub)) return 0.0;
  return 100.0 * (ub - lb) / ub;
}

CaseOutcome run_case(const RunConfig& config) {
  using Clock = std::chrono::steady_clock;
  CaseOutcome out;
  json rep;
  rep["schema_version"] = 1;
  rep["input"] = {{"path", config.input_path},
                  {"format", config.format == InputFormat::Native ? "native"
                             : config.format == InputFormat::Matpower ? "matpower"
                                                                      : "auto"}};
  rep["config"] = config_json(config);

  const auto t_start = Clock::now();
  NetworkCase net;
  {
    const std::string err = detect_and_read(config, net);
    if (!err.empty()) {
      out.status = "error: " + err;
      out.exit_code = 1;
      return out;  // no partial output file
    }
  }
  out.case_name = net.name;
  rep["case"] = net.name;
  rep["network"] = {{"buses", net.buses.size()},
                    {"generators", net.generators.size()},
                    {"branches", net.branches.size()},
                    {"base_mva", net.base_mva}};
  const auto t_parsed = Clock::now();

  QcqpModel model;
  SdpResult sdp;
  Reformulation reform;
  auto t_built = t_parsed, t_sdp = t_parsed, t_reform = t_parsed;
  try {
    model = build_qcqp(net, config.qcqp);
    t_built = Clock::now();
    sdp = solve_sdp(model, config.sdp);
    t_sdp = Clock::now();

    const double off = model.objective_offset;
    out.sdp_value = sdp.primal_value + off;
    rep["sdp"] = {{"status", to_string(sdp.status)},
                  {"primal_value", fin(sdp.primal_value)},
                  {"dual_value", fin(sdp.dual_value)},
                  {"primal_value_with_offset", fin(sdp.primal_value + off)},
                  {"iterations", sdp.iterations},
                  {"primal_infeasibility", fin(sdp.primal_infeasibility)},
                  {"dual_infeasibility", fin(sdp.dual_infeasibility)},
                  {"relative_gap", fin(sdp.complementarity)}};
    rep["model"] = {{"n", model.n},
                    {"constraints", model.constraints.size()},
                    {"objective_offset", model.objective_offset}};
    if (sdp.status == SdpStatus::Optimal) {
      out.sdp_relative_gap = duality_gap(sdp);
      rep["sdp"]["duality_gap"] = fin(out.sdp_relative_gap);
    }

    if (!config.sdp_dump_path.empty() && sdp.status == SdpStatus::Optimal) {
      json dump;
      dump["duals"] = std::vector<double>(sdp.duals.data(), sdp.duals.data() + sdp.duals.size());
      dump["x_matrix"] = json::array();
      for (Eigen::Index i = 0; i < sdp.x_matrix.rows(); ++i)
        dump["x_matrix"].push_back(std::vector<double>(
            sdp.x_matrix.row(i).data(), sdp.x_matrix.row(i).data() + sdp.x_matrix.cols()));
      std::ofstream(config.sdp_dump_path) << dump.dump(2);
    }

    if (config.mode == RunMode::SdpOnly) {
      rep["phases"] = {{"parse_s", now_between(t_start, t_parsed)},
                       {"build_s", now_between(t_parsed, t_built)},
                       {"sdp_s", now_between(t_built, t_sdp)},
                       {"total_s", now_between(t_start, Clock::now())}};
      out.status = to_string(sdp.status);
      out.exit_code = sdp.status == SdpStatus::Optimal ? 0 : 1;
      out.report = rep;
      if (!config.output_path.empty()) std::ofstream(config.output_path) << rep.dump(2);
      return out;
    }

    if (sdp.status != SdpStatus::Optimal) {
      out.status = std::string("error: sdp ") + to_string(sdp.status);
      out.exit_code = 1;
      out.report = rep;
      return out;
    }

    reform = build_reformulation(model, sdp);
    t_reform = Clock::now();
    rep["reformulation"] = {{"pairs", reform.pair_set.size()},
                            {"lambda_min", fin(reform.s_star_lambda_min)},
                            {"psd_shift", fin(reform.psd_shift)}};
  } catch (const std::exception& e) {
    out.status = std::string("error: ") + e.what();
    out.exit_code = 1;
    return out;
  }

  const double off = model.objective_offset;

  if (config.mode == RunMode::RootOnly) {
    try {
      NodeRelaxation relax(reform, model);
      QpSolution root = relax.solve(model.lower, model.upper, config.qp);
      const auto t_root = Clock::now();

      // upper bound for the root gap: heuristic from flat start and from the
      // root relaxation point
      double ub = std::numeric_limits<double>::infinity();
      LocalPoint seed = local_solve(model, flat_start(model), config.local);
      if (seed.converged) ub = std::min(ub, seed.objective);
      if (root.status == QpStatus::Optimal) {
        LocalPoint polish = local_solve(model, root.x_bar, config.local);
        if (polish.converged) ub = std::min(ub, polish.objective);
      }

      out.root_bound = root.value + off;
      out.upper_bound = ub + off;
      // a certified bound against a 1e-5-tolerance feasible point can sit a
      // hair above it; report that as a closed gap
      out.root_gap_pct =
          std::isfinite(ub) ? std::max(0.0, gap_percent(ub + off, root.value + off))
                            : -1.0;
      out.nodes = 1;
      out.time_s = now_between(t_start, t_root);
      out.status = root.status == QpStatus::Optimal ? "root_solved" : to_string(root.status);
      rep["root"] = {{"status", to_string(root.status)},
                     {"value", fin(root.value)},
                     {"value_with_offset", fin(root.value + off)},
                     {"upper_bound", fin(out.upper_bound)},
                     {"root_gap_pct", fin(out.root_gap_pct)},
                     {"iterations", root.iterations},
                     {"sdp_root_match_rel",
                      fin(std::abs(root.value - sdp.primal_value) /
                          std::max(1.0, std::abs(sdp.primal_value)))}};
      rep["phases"] = {{"parse_s", now_between(t_start, t_parsed)},
                       {"build_s", now_between(t_parsed, t_built)},
                       {"sdp_s", now_between(t_built, t_sdp)},
                       {"reform_s", now_between(t_sdp, t_reform)},
                       {"root_s", now_between(t_reform, t_root)},
                       {"total_s", now_between(t_start, Clock::now())}};
      out.exit_code = root.status == QpStatus::Optimal ? 0 : 1;
      out.report = rep;
      if (!config.output_path.empty()) std::ofstream(config.output_path) << rep.dump(2);
      return out;
    } catch (const std::exception& e) {
      out.status = std::string("error: ") + e.what();
      out.exit_code = 1;
      return out;
    }
  }

  // full mode
  try {
    BnbOptions bopts = config.bnb;
    bopts.qp = config.qp;
    bopts.local = config.local;
    bopts.verbosity = config.verbosity;
    SolveReport sr = solve(model, reform, bopts);
    const auto t_bnb = Clock::now();

    out.nodes = sr.nodes_processed;
    out.time_s = now_between(t_start, t_bnb);
    out.status = to_string(sr.status);
    out.upper_bound = sr.upper_bound;
    out.lower_bound = sr.lower_bound;
    out.root_bound = sr.root_bound;
    out.final_gap_pct = sr.has_incumbent ? 100.0 * sr.gap : -1.0;
    out.root_gap_pct = sr.has_incumbent ? 100.0 * sr.root_gap : -1.0;

    rep["bounds"] = {{"upper", fin(sr.upper_bound)},
                     {"lower", fin(sr.lower_bound)},
                     {"gap", fin(sr.gap)},
                     {"final_gap_pct", fin(out.final_gap_pct)},
                     {"root_bound", fin(sr.root_bound)},
                     {"root_gap_pct", fin(out.root_gap_pct)}};
    rep["bnb"] = {{"status", to_string(sr.status)},
                  {"nodes", sr.nodes_processed},
                  {"wall_time_s", sr.wall_time_s},
                  {"has_incumbent", sr.has_incumbent}};
    if (sr.has_incumbent)
      rep["best_x"] = std::vector<double>(sr.best_x.data(), sr.best_x.data() + sr.best_x.size());
    rep["phases"] = {{"parse_s", now_between(t_start, t_parsed)},
                     {"build_s", now_between(t_parsed, t_built)},
                     {"sdp_s", now_between(t_built, t_sdp)},
                     {"reform_s", now_between(t_sdp, t_reform)},
                     {"bnb_s", now_between(t_reform, t_bnb)},
                     {"total_s", now_between(t_start, Clock::now())}};

    out.exit_code = sr.status == BnbStatus::GlobalOptimal ? 0
                    : sr.status == BnbStatus::TimeLimit   ? 2
                                                          : 1;
    out.report = rep;
    if (!config.output_path.empty()) std::ofstream(config.output_path) << rep.dump(2);
    return out;
  } catch (const std::exception& e) {
    out.status = std::string("error: ") + e.what();
    out.exit_code = 1;
    return out;
  }
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "case,root_gap_pct,final_gap_pct,time_s,nodes,status\n";
  for (const BenchRow& r : rows) {
    out << r.case_name << ',';
    if (r.root_gap_pct >= 0.0) out << r.root_gap_pct;
    out << ',';
    if (r.final_gap_pct >= 0.0) out << r.final_gap_pct;
    out << ',' << r.time_s << ',' << r.nodes << ',' << r.status << '\n';
  }
  return out.str();
}

std::vector<BenchRow> run_bench(const std::string& corpus_dir, const RunConfig& base,
                                const std::string& csv_path, const std::string& json_path) {
  std::vector<fs::path> files;
  if (fs::exists(corpus_dir))
    for (const auto& e : fs::directory_iterator(corpus_dir)) {
      if (!e.is_regular_file()) continue;
      const std::string ext = e.path().extension().string();
      if (ext == ".m" || ext == ".json") files.push_back(e.path());
    }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem() < b.stem(); });

  std::vector<BenchRow> rows;
  for (const fs::path& f : files) {
    RunConfig cfg = base;
    cfg.input_path = f.string();
    cfg.output_path.clear();
    BenchRow row;
    row.case_name = f.stem().string();
    try {
      CaseOutcome oc = run_case(cfg);
      row.root_gap_pct = oc.root_gap_pct;
      row.final_gap_pct = oc.final_gap_pct;
      row.time_s = oc.time_s;
      row.nodes = oc.nodes;
      row.status = oc.status;
      if (oc.status == "global_optimal") {
        std::ostringstream t;
        t.precision(3);
        t << std::fixed << oc.time_s << "s";
        row.final_gap_or_time = t.str();
      } else if (oc.final_gap_pct >= 0.0) {
        std::ostringstream t;
        t.precision(2);
        t << std::fixed << "(" << oc.final_gap_pct << "%)";
        row.final_gap_or_time = t.str();
      } else {
        row.final_gap_or_time = oc.status;
      }
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
      row.final_gap_or_time = "error";
    }
    rows.push_back(row);
  }

  if (!csv_path.empty()) std::ofstream(csv_path) << bench_csv(rows);
  if (!json_path.empty()) {
    json j = json::array();
    for (const BenchRow& r : rows)
      j.push_back({{"case", r.case_name},
                   {"root_gap_pct", fin(r.root_gap_pct)},
                   {"final_gap_pct", fin(r.final_gap_pct)},
                   {"time_s", r.time_s},
                   {"nodes", r.nodes},
                   {"status", r.status}});
    std::ofstream(json_path) << j.dump(2);
  }
  return rows;
}

}  // namespace opf
