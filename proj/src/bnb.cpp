/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "opf/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "opf/errors.hpp"

namespace opf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_volume(const Vector& lo, const Vector& hi) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    v += std::log(std::max(hi[i] - lo[i], 1e-300));
  return v;
}
}  // namespace

const char* to_string(BnbStatus s) {
  switch (s) {
    case BnbStatus::GlobalOptimal: return "global_optimal";
    case BnbStatus::TimeLimit: return "time_limit";
    case BnbStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

const char* to_string(NodeOutcome o) {
  switch (o) {
    case NodeOutcome::PrunedInfeasible: return "pruned_infeasible";
    case NodeOutcome::PrunedByBound: return "pruned_by_bound";
    case NodeOutcome::IncumbentCandidate: return "incumbent_candidate";
    case NodeOutcome::Branched: return "branched";
    case NodeOutcome::Requeued: return "requeued";
    case NodeOutcome::NumericalTroubleNode: return "numerical_trouble";
  }
  return "unknown";
}

void NodeQueue::push(BnbNode node) {
  const long id = node.id;
  if (static_cast<std::size_t>(id) >= nodes_.size()) {
    nodes_.resize(id + 1);
    live_.resize(id + 1, 0);
  }
  order_.emplace(node.potential, id);
  nodes_[id] = std::move(node);
  live_[id] = 1;
}

BnbNode NodeQueue::pop_min() {
  if (order_.empty()) throw EmptyQueue("node queue is empty");
  auto it = order_.begin();
  const long id = it->second;
  order_.erase(it);
  live_[id] = 0;
  return std::move(nodes_[id]);
}

double NodeQueue::min_potential() const {
  return order_.empty() ? kInf : order_.begin()->first;
}

std::pair<int, double> choose_branch(const Reformulation& r, const QpSolution& sol,
                                     const BnbNode& node, double delta) {
  const auto [pair, viol] = bilinear_violation(r, sol);
  (void)viol;
  const auto [i, j] = pair;
  const double wi = node.upper[i] - node.lower[i];
  const double wj = node.upper[j] - node.lower[j];
  int b;
  if (wi > wj)
    b = i;
  else if (wj > wi)
    b = j;
  else
    b = std::min(i, j);

  const double w = node.upper[b] - node.lower[b];
  const double scale = std::max({1.0, std::abs(node.upper[b]), std::abs(node.lower[b])});
  if (w <= 1e-12 * scale)
    throw ZeroWidthInterval("choose_branch: variable " + std::to_string(b) +
                            " has a degenerate interval");

  const double mid = 0.5 * (node.lower[b] + node.upper[b]);
  double split = delta * sol.x_bar[b] + (1.0 - delta) * mid;
  split = std::clamp(split, node.lower[b] + 1e-6 * w, node.upper[b] - 1e-6 * w);
  return {b, split};
}

bool should_terminate(double ub, double lb, double epsilon, bool queue_empty) {
  if (queue_empty) return true;
  if (!std::isfinite(ub)) return false;
  // the slack keeps an exact-arithmetic boundary (gap == epsilon) terminating
  // despite the subtraction's representation error
  return (ub - lb) / std::max(1e-12, std::abs(ub)) <= epsilon * (1.0 + 1e-9);
}

namespace {

struct SharedState {
  std::mutex mu;
  std::condition_variable cv;
  NodeQueue queue;
  std::multiset<double> inflight;  // potentials of nodes being solved
  double ub_raw = kInf;            // x'Cx scale
  Vector best_x;
  bool has_incumbent = false;
  long next_id = 0;
  long processed = 0;
  long heuristic_counter = 0;
  bool stop = false;
  BnbStatus status = BnbStatus::GlobalOptimal;
  std::vector<NodeEvent> events;
  double root_value_raw = kInf;
  bool root_infeasible = false;
  int active_workers = 0;

  double offset = 0.0;

  double lb_raw() const {
    double lb = queue.min_potential();
    if (!inflight.empty()) lb = std::min(lb, *inflight.begin());
    if (lb == kInf) lb = ub_raw;  // tree exhausted
    return lb;
  }
  double money(double raw) const { return raw + offset; }
};

}  // namespace

SolveReport solve(const QcqpModel& model, const Reformulation& r, const BnbOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  NodeRelaxation relax(r, model);

  SharedState st;
  st.offset = model.objective_offset;

  // seed the incumbent before the search starts
  {
    LocalPoint seed = local_solve(model, flat_start(model), opts.local);
    if (seed.converged && seed.max_violation <= opts.local.feasibility_tol) {
      st.ub_raw = seed.objective;
      st.best_x = seed.x;
      st.has_incumbent = true;
      if (opts.verbosity > 0)
        std::printf("bnb: seed incumbent %.8e\n", st.money(seed.objective));
    }
  }

  {
    BnbNode root;
    root.lower = model.lower;
    root.upper = model.upper;
    root.potential = -kInf;
    root.id = st.next_id++;
    st.queue.push(std::move(root));
  }

  auto incumbent_update = [&st](double value_raw, const Vector& x) {
    if (value_raw < st.ub_raw) {
      st.ub_raw = value_raw;
      st.best_x = x;
      st.has_incumbent = true;
    }
  };

  auto worker = [&]() {
    for (;;) {
      BnbNode node;
      {
        std::unique_lock<std::mutex> lk(st.mu);
        st.cv.wait(lk, [&] {
          return st.stop || !st.queue.empty() ||
                 (st.inflight.empty() && st.queue.empty());
        });
        if (st.stop) return;
        if (st.queue.empty()) {
          if (st.inflight.empty()) {
            st.stop = true;
            st.cv.notify_all();
            return;
          }
          continue;
        }
        if (elapsed() > opts.time_limit_seconds) {
          st.stop = true;
          st.status = BnbStatus::TimeLimit;
          st.cv.notify_all();
          return;
        }
        if (opts.max_nodes > 0 && st.processed >= opts.max_nodes) {
          st.stop = true;
          st.status = BnbStatus::TimeLimit;
          st.cv.notify_all();
          return;
        }
        const double lb_money = st.money(st.lb_raw());
        const double ub_money = st.has_incumbent ? st.money(st.ub_raw) : kInf;
        if (st.has_incumbent && !st.queue.empty() &&
            should_terminate(ub_money, lb_money, opts.epsilon)) {
          st.stop = true;
          st.cv.notify_all();
          return;
        }
        node = st.queue.pop_min();
        st.inflight.insert(node.potential);
        ++st.active_workers;
      }

      QpOptions qopts = opts.qp;
      if (node.retries > 0) {
        qopts.max_iterations *= 4;
        qopts.eps_abs *= 0.1;
        qopts.eps_rel *= 0.1;
      }
      QpSolution sol;
      bool solver_threw = false;
      try {
        sol = relax.solve(node.lower, node.upper, qopts,
                          node.warm ? node.warm.get() : nullptr);
      } catch (const std::exception&) {
        solver_threw = true;
      }

      // heuristic cadence: every k-th processed node launches a local solve
      bool run_heuristic = false;
      NodeEvent ev;
      ev.id = node.id;
      ev.parent = node.parent;
      ev.depth = node.depth;
      ev.potential = node.potential;
      ev.log_volume = log_volume(node.lower, node.upper);

      {
        std::unique_lock<std::mutex> lk(st.mu);
        st.inflight.erase(st.inflight.find(node.potential));
        --st.active_workers;

        const bool is_root = node.id == 0;

        if (solver_threw || sol.status == QpStatus::IterLimit) {
          if (node.retries == 0) {
            ev.outcome = NodeOutcome::Requeued;
            ev.value = node.potential;
            BnbNode retry = node;
            retry.retries = 1;
            st.queue.push(std::move(retry));
          } else {
            // cannot bound this node; bisect it to keep the search sound
            ev.outcome = NodeOutcome::NumericalTroubleNode;
            ev.value = node.potential;
            int widest = 0;
            double wbest = -1.0;
            for (Eigen::Index t = 0; t < node.lower.size(); ++t)
              if (node.upper[t] - node.lower[t] > wbest) {
                wbest = node.upper[t] - node.lower[t];
                widest = static_cast<int>(t);
              }
            if (wbest > 1e-9) {
              const double mid = 0.5 * (node.lower[widest] + node.upper[widest]);
              for (int side = 0; side < 2; ++side) {
                BnbNode child;
                child.lower = node.lower;
                child.upper = node.upper;
                (side == 0 ? child.upper[widest] : child.lower[widest]) = mid;
                child.potential = node.potential;
                child.depth = node.depth + 1;
                child.id = st.next_id++;
                child.parent = node.id;
                child.warm = node.warm;
                st.queue.push(std::move(child));
              }
            }
          }
          ++st.processed;
          ev.lb_after = st.money(st.lb_raw());
          ev.ub_after = st.has_incumbent ? st.money(st.ub_raw) : kInf;
          st.events.push_back(ev);
          st.cv.notify_all();
          continue;
        }

        if (sol.status == QpStatus::Infeasible) {
          if (is_root) st.root_infeasible = true;
          ev.outcome = NodeOutcome::PrunedInfeasible;
          ev.value = kInf;
        } else {
          // clamp the relaxation value up to the inherited potential
          double value = sol.value;
          if (std::isfinite(node.potential)) value = std::max(value, node.potential);
          ev.value = value;
          if (is_root) st.root_value_raw = value;

          if (st.has_incumbent && value >= st.ub_raw - 1e-9) {
            ev.outcome = NodeOutcome::PrunedByBound;
          } else {
            const auto [pair, viol] = bilinear_violation(r, sol);
            (void)pair;
            if (viol <= 1e-6) {
              ev.outcome = NodeOutcome::IncumbentCandidate;
              EvalResult feas = evaluate(model, sol.x_bar);
              if (feas.max_violation <= opts.local.feasibility_tol) {
                incumbent_update(feas.objective, sol.x_bar);
              } else {
                lk.unlock();
                LocalPoint lp = local_solve(model, sol.x_bar, opts.local);
                lk.lock();
                if (lp.converged) incumbent_update(lp.objective, lp.x);
              }
            } else {
              int bvar = -1;
              double split = 0.0;
              bool ok = true;
              try {
                std::tie(bvar, split) = choose_branch(r, sol, node, opts.delta);
              } catch (const ZeroWidthInterval&) {
                ok = false;
              }
              if (!ok) {
                // degenerate box but still violating: record and try the point
                ev.outcome = NodeOutcome::NumericalTroubleNode;
                EvalResult feas = evaluate(model, sol.x_bar);
                if (feas.max_violation <= opts.local.feasibility_tol)
                  incumbent_update(feas.objective, sol.x_bar);
              } else {
                ev.outcome = NodeOutcome::Branched;
                auto warm = std::make_shared<Vector>(sol.z);
                for (int side = 0; side < 2; ++side) {
                  BnbNode child;
                  child.lower = node.lower;
                  child.upper = node.upper;
                  (side == 0 ? child.upper[bvar] : child.lower[bvar]) = split;
                  child.potential = value;
                  child.depth = node.depth + 1;
                  child.id = st.next_id++;
                  child.parent = node.id;
                  child.warm = warm;
                  st.queue.push(std::move(child));
                }
              }
            }
          }
        }

        ++st.processed;
        ++st.heuristic_counter;
        if (opts.heuristic_period > 0 &&
            st.heuristic_counter % opts.heuristic_period == 0 &&
            sol.status == QpStatus::Optimal)
          run_heuristic = true;

        ev.lb_after = st.money(st.lb_raw());
        ev.ub_after = st.has_incumbent ? st.money(st.ub_raw) : kInf;
        st.events.push_back(ev);
        if (opts.verbosity > 1)
          std::printf("node %ld depth %d out %s value %.8e lb %.8e ub %.8e open %zu\n",
                      ev.id, ev.depth, to_string(ev.outcome), ev.value, ev.lb_after,
                      ev.ub_after, st.queue.size());
        st.cv.notify_all();
      }

      if (run_heuristic) {
        LocalPoint lp = local_solve(model, sol.x_bar, opts.local);
        if (lp.converged) {
          std::lock_guard<std::mutex> lk(st.mu);
          incumbent_update(lp.objective, lp.x);
          st.cv.notify_all();
        }
      }
    }
  };

  const int nthreads = std::max(1, opts.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SolveReport rep;
  rep.objective_offset = st.offset;
  rep.nodes_processed = st.processed;
  rep.wall_time_s = elapsed();
  rep.events = std::move(st.events);
  rep.has_incumbent = st.has_incumbent;

  const double lb_raw = st.lb_raw();
  if (st.root_infeasible && !st.has_incumbent) {
    rep.status = BnbStatus::Infeasible;
    rep.upper_bound = kInf;
    rep.lower_bound = kInf;
    rep.gap = 0.0;
    return rep;
  }

  rep.best_x = st.best_x;
  rep.upper_bound = st.has_incumbent ? st.money(st.ub_raw) : kInf;
  rep.lower_bound = st.money(lb_raw);
  rep.root_bound = st.money(st.root_value_raw);
  if (st.has_incumbent) {
    rep.gap = (rep.upper_bound - rep.lower_bound) / std::max(1e-12, std::abs(rep.upper_bound));
    rep.gap = std::max(rep.gap, 0.0);
    rep.root_gap = (rep.upper_bound - rep.root_bound) / std::max(1e-12, std::abs(rep.upper_bound));
    rep.root_gap = std::max(rep.root_gap, 0.0);
  } else {
    rep.gap = kInf;
    rep.root_gap = kInf;
  }

  if (st.status == BnbStatus::TimeLimit)
    rep.status = BnbStatus::TimeLimit;
  else if (!st.has_incumbent)
    rep.status = BnbStatus::Infeasible;
  else
    rep.status = BnbStatus::GlobalOptimal;

  if (!opts.event_log_path.empty()) {
    std::ofstream out(opts.event_log_path);
    out << "id,parent,depth,potential,value,outcome,lb,ub,log_volume\n";
    for (const NodeEvent& e : rep.events)
      out << e.id << ',' << e.parent << ',' << e.depth << ',' << e.potential << ','
          << e.value << ',' << to_string(e.outcome) << ',' << e.lb_after << ','
          << e.ub_after << ',' << e.log_volume << '\n';
  }
  return rep;
}

}  // namespace opf
