#include "aogalloc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "aogalloc/error.hpp"

namespace aogalloc {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

class Search {
 public:
  Search(const Aog& graph, const ProgressState& state, const ArcCosts& costs)
      : g_(graph), costs_(costs), built_(graph.nodes().size(), 0),
        best_(graph.nodes().size(), std::numeric_limits<double>::quiet_NaN()), owner_(graph.pieces().size(), 0) {
    PieceSet covered = 0;
    for (NodeId n : state.solved) {
      if (n >= graph.nodes().size())
        throw Error(ErrorKind::invalid_argument, "progress state names unknown node " + std::to_string(n));
      const PieceSet p = graph.node(n).pieces;
      if (!disjoint(covered, p))
        throw Error(ErrorKind::invalid_argument, "progress state has overlapping built sub-assemblies");
      covered |= p;
      built_[n] = 1;
      for (std::size_t i = 0; i < owner_.size(); ++i)
        if (p & (PieceSet{1} << i)) owner_[i] = p;
    }
    if (covered != graph.full_set())
      throw Error(ErrorKind::invalid_argument, "progress state does not cover every piece");
  }

  double solve(NodeId n) {
    if (!std::isnan(best_[n])) return best_[n];
    double best = kInfinity;
    if (built_[n]) {
      best = 0.0;
    } else if (closed(g_.node(n).pieces)) {
      for (ArcId id : g_.arcs_into(n)) {
        const HyperArc& h = g_.arc(id);
        const double left = solve(h.children[0]);
        if (left == kInfinity) continue;
        const double right = solve(h.children[1]);
        if (right == kInfinity) continue;
        best = std::min(best, *costs_[id] + left + right);
      }
    }
    best_[n] = best;
    visited_.push_back(n);
    return best;
  }

  // Enabled arcs that lie on at least one minimum-cost decomposition of
  // `root`, via min-plus outside costs. Call after solve(root).
  std::vector<ArcId> optimal_enabled(NodeId root) {
    const double total = best_[root];
    const double tol = 1e-9 * std::max(1.0, total);
    std::vector<double> outside(g_.nodes().size(), kInfinity);
    outside[root] = 0.0;
    std::sort(visited_.begin(), visited_.end(), [&](NodeId a, NodeId b) {
      return piece_count(g_.node(a).pieces) > piece_count(g_.node(b).pieces);
    });
    std::vector<ArcId> out;
    for (NodeId n : visited_) {
      if (built_[n] || outside[n] == kInfinity || best_[n] == kInfinity) continue;
      for (ArcId id : g_.arcs_into(n)) {
        const HyperArc& h = g_.arc(id);
        const double l = best_[h.children[0]], r = best_[h.children[1]];
        if (std::isnan(l) || std::isnan(r) || l == kInfinity || r == kInfinity) continue;
        const double via = outside[n] + *costs_[id];
        if (via + l + r > total + tol) continue;
        outside[h.children[0]] = std::min(outside[h.children[0]], via + r);
        outside[h.children[1]] = std::min(outside[h.children[1]], via + l);
        if (built_[h.children[0]] && built_[h.children[1]]) out.push_back(id);
      }
    }
    return out;
  }

  bool built(NodeId n) const { return built_[n] != 0; }

 private:
  // A node is usable only if it is a union of built sub-assemblies.
  bool closed(PieceSet p) const {
    PieceSet closure = 0;
    for (PieceSet rest = p; rest; rest &= rest - 1) closure |= owner_[__builtin_ctzll(rest)];
    return closure == p;
  }

  const Aog& g_;
  const ArcCosts& costs_;
  std::vector<char> built_;
  std::vector<double> best_;
  std::vector<PieceSet> owner_;
  std::vector<NodeId> visited_;
};

PlanStep make_step(const Aog& g, ArcId id, const ArcCosts& costs) {
  const HyperArc& h = g.arc(id);
  return {id, h.action, h.worker, h.parent, h.children, *costs[id]};
}

bool suggestion_order(const PlanStep& a, const PlanStep& b) {
  return std::tie(a.cost, a.action, a.arc) < std::tie(b.cost, b.action, b.arc);
}

}  // namespace

PlanTree replan(const Aog& graph, const ProgressState& state, const ArcCosts& costs) {
  if (costs.size() != graph.arcs().size())
    throw Error(ErrorKind::invalid_argument, "cost vector does not match the graph's arc count");
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!costs[i]) throw Error(ErrorKind::planning, "arc " + std::to_string(i) + " has no cost");
    if (!(*costs[i] >= 0.0) || std::isinf(*costs[i]))
      throw Error(ErrorKind::planning, "arc " + std::to_string(i) + " has an invalid cost");
  }
  const auto root = graph.root();
  if (!root) throw Error(ErrorKind::planning, "graph has no root node");

  PlanTree plan;
  ProgressState work = state;
  bool first = true;
  while (true) {
    Search search(graph, work, costs);
    if (search.built(*root)) break;
    const double best = search.solve(*root);
    if (best == kInfinity)
      throw Error(ErrorKind::planning, "no decomposition of the root into the built sub-assemblies");
    std::vector<PlanStep> frontier;
    for (ArcId id : search.optimal_enabled(*root)) frontier.push_back(make_step(graph, id, costs));
    std::sort(frontier.begin(), frontier.end(), suggestion_order);
    if (first) {
      plan.total_cost = best;
      plan.ordered_frontier = frontier;
      first = false;
    }
    // Execution order under frozen costs: keep taking the frontier head.
    const PlanStep& head = frontier.front();
    plan.steps.push_back(head);
    plan.chosen.emplace_back(head.parent, head.arc);
    auto& solved = work.solved;
    solved.erase(std::remove_if(solved.begin(), solved.end(),
                                [&](NodeId n) { return n == head.children[0] || n == head.children[1]; }),
                 solved.end());
    solved.insert(std::upper_bound(solved.begin(), solved.end(), head.parent), head.parent);
  }
  std::sort(plan.chosen.begin(), plan.chosen.end());
  return plan;
}

PlanTree optimal_plan(const Aog& graph, const ProgressState& state) {
  return replan(graph, state, graph.costs());
}

PlanStep next_action(const PlanTree& plan, const ProgressState& state) {
  for (const PlanStep& s : plan.ordered_frontier)
    if (state.is_solved(s.children[0]) && state.is_solved(s.children[1])) return s;
  throw Error(ErrorKind::not_enabled, plan.empty() ? "plan is empty: nothing left to assemble"
                                                   : "no action of the plan is enabled in this state");
}

nlohmann::json plan_to_json(const Aog& graph, const PlanTree& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const PlanStep& s : plan.steps) {
    steps.push_back({{"action", graph.action(s.action)},
                     {"worker", graph.worker(s.worker).id},
                     {"parent", s.parent},
                     {"children", {s.children[0], s.children[1]}},
                     {"cost", s.cost}});
  }
  return {{"v", 1}, {"total_cost", plan.total_cost}, {"steps", std::move(steps)}};
}

}  // namespace aogalloc
