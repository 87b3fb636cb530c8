#pragma once

// Minimum-cost decomposition of the root into the currently built
// sub-assemblies. best(n) = min over arcs h into n of
// cost(h) + best(child0) + best(child1), with best(built node) = 0; nodes that
// straddle a built sub-assembly are unreachable. Only the reduced graph above
// the built set is visited, so replanning gets cheaper as the task advances.
//
// The frontier holds every enabled arc that lies on some minimum-cost
// decomposition, ordered by (cost, action index, arc id); next_action() takes
// its head. The full execution order repeats that rule under frozen costs.

#include <array>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "aogalloc/aog.hpp"

namespace aogalloc {

struct PlanStep {
  ArcId arc = 0;
  ActionIndex action = 0;
  WorkerIndex worker = 0;
  NodeId parent = 0;
  std::array<NodeId, 2> children{};
  double cost = 0.0;

  bool operator==(const PlanStep&) const = default;
};

struct PlanTree {
  std::vector<std::pair<NodeId, ArcId>> chosen;  // (parent, arc) of every step, ascending
  double total_cost = 0.0;
  std::vector<PlanStep> ordered_frontier;        // executable now, in suggestion order
  std::vector<PlanStep> steps;                   // full execution order under frozen costs

  bool empty() const noexcept { return chosen.empty(); }
  bool operator==(const PlanTree&) const = default;
};

/// Plans with the costs stored on the graph's arcs.
PlanTree optimal_plan(const Aog& graph, const ProgressState& state);
/// Plans on the reduced graph above `state` with externally supplied costs.
PlanTree replan(const Aog& graph, const ProgressState& state, const ArcCosts& costs);

/// Head of the frontier that is enabled in `state`.
PlanStep next_action(const PlanTree& plan, const ProgressState& state);

/// {v, total_cost, steps:[{action, worker, parent, children, cost}]}
nlohmann::json plan_to_json(const Aog& graph, const PlanTree& plan);

}  // namespace aogalloc
