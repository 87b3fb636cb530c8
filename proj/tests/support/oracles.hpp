#pragma once

// Reference implementations used to check the library. Each one is written
// from first principles and shares no code path with the code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "aogalloc/aog.hpp"

namespace oracle {

using aogalloc::PieceSet;

inline bool contiguous(PieceSet s) {
  if (s == 0) return false;
  while (!(s & 1)) s >>= 1;
  return (s & (s + 1)) == 0;
}

struct Counts {
  std::size_t nodes = 0;
  std::size_t arcs = 0;
};

// Walks every subset of n pieces; a linear assembly keeps the contiguous ones
// and every unordered split of one into two contiguous parts, once per worker.
inline Counts linear_counts_by_enumeration(std::size_t n, std::size_t workers) {
  Counts c;
  const PieceSet all = (PieceSet{1} << n) - 1;
  for (PieceSet s = 1; s <= all; ++s) {
    if (!contiguous(s)) continue;
    ++c.nodes;
    std::size_t splits = 0;
    for (PieceSet a = (s - 1) & s; a; a = (a - 1) & s) {
      const PieceSet b = s & ~a;
      if (a < b && contiguous(a) && contiguous(b)) ++splits;
    }
    c.arcs += splits * workers;
  }
  return c;
}

// All subsets, all bipartitions (the "everything feasible" graph).
inline Counts full_counts_by_enumeration(std::size_t n, std::size_t workers) {
  Counts c;
  const PieceSet all = (PieceSet{1} << n) - 1;
  for (PieceSet s = 1; s <= all; ++s) {
    ++c.nodes;
    for (PieceSet a = (s - 1) & s; a; a = (a - 1) & s)
      if (a < (s & ~a)) c.arcs += workers;
  }
  return c;
}

// Exhaustive minimum over every decomposition tree and worker assignment of
// the interval [lo, hi] of a linear assembly. Trees are enumerated explicitly
// (no memoization) and each tree's cost summed from scratch.
class LinearTreeEnumerator {
 public:
  // cost(lo, mid, hi, worker): cost of joining [lo, mid] and [mid+1, hi].
  using CostFn = std::function<double(std::size_t, std::size_t, std::size_t, std::size_t)>;

  LinearTreeEnumerator(std::size_t workers, CostFn cost) : workers_(workers), cost_(std::move(cost)) {}

  std::vector<double> all_tree_costs(std::size_t lo, std::size_t hi) const {
    if (lo == hi) return {0.0};
    std::vector<double> out;
    for (std::size_t mid = lo; mid < hi; ++mid) {
      const auto left = all_tree_costs(lo, mid);
      const auto right = all_tree_costs(mid + 1, hi);
      for (std::size_t w = 0; w < workers_; ++w)
        for (double l : left)
          for (double r : right) out.push_back(cost_(lo, mid, hi, w) + l + r);
    }
    return out;
  }

  double minimum(std::size_t lo, std::size_t hi) const {
    const auto costs = all_tree_costs(lo, hi);
    return *std::min_element(costs.begin(), costs.end());
  }

 private:
  std::size_t workers_;
  CostFn cost_;
};

// Cost lookup for a generated linear assembly: finds the arc joining
// [lo, mid] and [mid+1, hi] for the worker by scanning the arc list.
inline LinearTreeEnumerator::CostFn linear_graph_costs(const aogalloc::Aog& g, const aogalloc::ArcCosts& costs) {
  std::map<std::tuple<PieceSet, PieceSet, std::size_t>, double> table;
  for (const aogalloc::HyperArc& h : g.arcs()) {
    PieceSet a = g.node(h.children[0]).pieces, b = g.node(h.children[1]).pieces;
    if (a > b) std::swap(a, b);
    table[{a, b, h.worker}] = *costs[h.id];
  }
  auto interval = [](std::size_t lo, std::size_t hi) { return ((PieceSet{1} << (hi + 1)) - 1) & ~((PieceSet{1} << lo) - 1); };
  return [table, interval](std::size_t lo, std::size_t mid, std::size_t hi, std::size_t w) {
    PieceSet a = interval(lo, mid), b = interval(mid + 1, hi);
    if (a > b) std::swap(a, b);
    return table.at({a, b, w});
  };
}

// Constant-G closed forms.
inline double charge(double v0, double g, double t, double capacity) {
  return 1.0 - (1.0 - v0) * std::exp(-g * t / capacity);
}
inline double discharge(double v0, double r, double t, double capacity) { return v0 * std::exp(-r * t / capacity); }

}  // namespace oracle
