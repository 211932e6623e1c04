/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "opf/local.hpp"
#include "opf/qp.hpp"
#include "opf/reform.hpp"

namespace opf {

enum class BnbStatus { GlobalOptimal, TimeLimit, Infeasible };
enum class NodeOutcome {
  PrunedInfeasible,
  PrunedByBound,
  IncumbentCandidate,
  Branched,
  Requeued,
  NumericalTroubleNode,
};

const char* to_string(BnbStatus s);
const char* to_string(NodeOutcome o);

struct BnbOptions {
  double epsilon = 1e-5;          // relative UB-LB termination gap
  double delta = 0.5;             // branching-point blend toward x_bar
  int heuristic_period = 3;       // local solve every k-th processed node
  double time_limit_seconds = 300.0;
  int threads = 1;
  long max_nodes = 0;             // 0 = unlimited
  QpOptions qp;
  LocalOptions local;
  int verbosity = 0;
  std::string event_log_path;     // CSV written when non-empty
};

struct BnbNode {
  Vector lower, upper;
  double potential = 0.0;  // parent's relaxation value
  int depth = 0;
  long id = 0;
  long parent = -1;
  int retries = 0;
  std::shared_ptr<Vector> warm;  // parent's (x, y) stacked solution
};

struct NodeEvent {
  long id = 0;
  long parent = -1;
  int depth = 0;
  double potential = 0.0;
  double value = 0.0;          // node relaxation value (raw objective scale)
  NodeOutcome outcome{};
  double lb_after = 0.0;       // money scale
  double ub_after = 0.0;       // money scale
  double log_volume = 0.0;
};

// Bounds and gaps are reported on the case objective scale, i.e. including
// the constant netted out of x'Cx at generator buses.
struct SolveReport {
  Vector best_x;
  bool has_incumbent = false;
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;        // (UB - LB) / |UB|
  long nodes_processed = 0;
  double root_bound = 0.0;
  double root_gap = 0.0;   // (UB - root_bound) / |UB| with the final UB
  double wall_time_s = 0.0;
  BnbStatus status = BnbStatus::Infeasible;
  double objective_offset = 0.0;
  std::vector<NodeEvent> events;
};

// Best-first open-node pool keyed by (potential, id); smallest id wins ties.
class NodeQueue {
 public:
  void push(BnbNode node);
  BnbNode pop_min();  // throws EmptyQueue when empty
  bool empty() const { return order_.empty(); }
  std::size_t size() const { return order_.size(); }
  double min_potential() const;  // +inf when empty

 private:
  std::set<std::pair<double, long>> order_;
  std::vector<BnbNode> nodes_;
  std::vector<char> live_;
};

// Branching variable and split point for the most violated bilinear pair:
// the wider-interval variable of the pair, split at
// delta * x_bar + (1 - delta) * interval midpoint, clamped into the box.
std::pair<int, double> choose_branch(const Reformulation& r, const QpSolution& sol,
                                     const BnbNode& node, double delta);

// true iff an incumbent exists and the relative gap is within epsilon, or
// the queue is empty
bool should_terminate(double ub, double lb, double epsilon, bool queue_empty = false);

SolveReport solve(const QcqpModel& model, const Reformulation& r, const BnbOptions& opts);

}  // namespace opf
