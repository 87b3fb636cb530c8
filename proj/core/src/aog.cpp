#include "aogalloc/aog.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "aogalloc/error.hpp"

namespace aogalloc {

const char* to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::leaf: return "leaf";
    case NodeKind::internal: return "internal";
    case NodeKind::root: return "root";
  }
  return "internal";
}

const char* to_string(WorkerKind kind) noexcept {
  return kind == WorkerKind::human ? "human" : "robot";
}

WorkerKind parse_worker_kind(std::string_view text) {
  if (text == "human") return WorkerKind::human;
  if (text == "robot") return WorkerKind::robot;
  throw Error(ErrorKind::parse, "unknown worker kind '" + std::string(text) + "' (expected human|robot)");
}

namespace {

PieceSet all_pieces(std::size_t n) {
  if (n >= 64) return ~PieceSet{0};
  return (PieceSet{1} << n) - 1;
}

bool canonical_less(PieceSet a, PieceSet b) {
  const int ca = piece_count(a), cb = piece_count(b);
  return ca != cb ? ca < cb : a < b;
}

}  // namespace

Aog::Aog(std::vector<std::string> pieces, std::vector<Worker> workers,
         std::vector<std::string> actions, std::vector<Node> nodes, std::vector<HyperArc> arcs)
    : pieces_(std::move(pieces)),
      workers_(std::move(workers)),
      actions_(std::move(actions)),
      nodes_(std::move(nodes)),
      arcs_(std::move(arcs)),
      full_set_(all_pieces(pieces_.size())) {
  if (pieces_.size() > kMaxPieces)
    throw Error(ErrorKind::invalid_argument, "at most 64 pieces are supported");
  arcs_into_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != i)
      throw Error(ErrorKind::validation, "node ids must be dense and ordered (node at position " +
                                             std::to_string(i) + " has id " +
                                             std::to_string(nodes_[i].id) + ")");
    by_pieces_.emplace(nodes_[i].pieces, nodes_[i].id);
  }
  for (std::size_t i = 0; i < arcs_.size(); ++i) {
    const HyperArc& h = arcs_[i];
    if (h.id != i)
      throw Error(ErrorKind::validation, "arc ids must be dense and ordered (arc at position " +
                                             std::to_string(i) + " has id " +
                                             std::to_string(h.id) + ")");
    if (h.parent >= nodes_.size() || h.children[0] >= nodes_.size() ||
        h.children[1] >= nodes_.size())
      throw Error(ErrorKind::validation, "arc " + std::to_string(i) + " references an unknown node");
    if (h.worker >= workers_.size())
      throw Error(ErrorKind::validation, "arc " + std::to_string(i) + " references an unknown worker");
    if (h.action >= actions_.size())
      throw Error(ErrorKind::validation, "arc " + std::to_string(i) + " references an unknown action");
    arcs_into_[h.parent].push_back(h.id);
  }
}

std::optional<NodeId> Aog::find_node(PieceSet pieces) const {
  auto it = by_pieces_.find(pieces);
  if (it == by_pieces_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> Aog::leaves() const {
  std::vector<NodeId> out;
  for (const Node& n : nodes_)
    if (piece_count(n.pieces) == 1) out.push_back(n.id);
  return out;
}

std::optional<ActionIndex> Aog::find_action(std::string_view id) const {
  auto it = std::find(actions_.begin(), actions_.end(), id);
  if (it == actions_.end()) return std::nullopt;
  return static_cast<ActionIndex>(it - actions_.begin());
}

std::optional<WorkerIndex> Aog::find_worker(std::string_view id) const {
  for (std::size_t i = 0; i < workers_.size(); ++i)
    if (workers_[i].id == id) return static_cast<WorkerIndex>(i);
  return std::nullopt;
}

ActionIndex Aog::action_index(std::string_view id) const {
  if (auto a = find_action(id)) return *a;
  throw Error(ErrorKind::not_found, "unknown action '" + std::string(id) + "'");
}

WorkerIndex Aog::worker_index(std::string_view id) const {
  if (auto w = find_worker(id)) return *w;
  throw Error(ErrorKind::not_found, "unknown worker '" + std::string(id) + "'");
}

ArcCosts Aog::costs() const {
  ArcCosts out;
  out.reserve(arcs_.size());
  for (const HyperArc& h : arcs_) out.push_back(h.cost);
  return out;
}

bool Aog::fully_costed() const {
  return std::all_of(arcs_.begin(), arcs_.end(), [](const HyperArc& h) { return h.cost.has_value(); });
}

Aog Aog::with_costs(const ArcCosts& costs) const {
  if (costs.size() != arcs_.size())
    throw Error(ErrorKind::invalid_argument, "cost vector size " + std::to_string(costs.size()) +
                                                 " does not match arc count " +
                                                 std::to_string(arcs_.size()));
  Aog copy = *this;
  for (std::size_t i = 0; i < costs.size(); ++i) copy.arcs_[i].cost = costs[i];
  return copy;
}

std::string Aog::describe(PieceSet pieces) const {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!(pieces & (PieceSet{1} << i))) continue;
    if (!first) out += ',';
    out += pieces_[i];
    first = false;
  }
  return out + "}";
}

namespace {

struct Split {
  PieceSet whole;
  PieceSet a;
  PieceSet b;
  std::string action;  // empty -> default name
};

void check_pieces_and_workers(const std::vector<std::string>& pieces,
                              const std::vector<Worker>& workers) {
  if (pieces.empty()) throw Error(ErrorKind::invalid_argument, "piece set is empty");
  if (pieces.size() > kMaxPieces)
    throw Error(ErrorKind::invalid_argument, "at most 64 pieces are supported");
  if (std::set<std::string>(pieces.begin(), pieces.end()).size() != pieces.size())
    throw Error(ErrorKind::invalid_argument, "piece names must be unique");
  if (workers.empty()) throw Error(ErrorKind::invalid_argument, "at least one worker is required");
  std::set<std::string> ids;
  for (const Worker& w : workers)
    if (!ids.insert(w.id).second)
      throw Error(ErrorKind::invalid_argument, "duplicate worker id '" + w.id + "'");
}

// Shared canonical layout: nodes by (size, mask), arcs by (parent, children,
// action, worker). Builders only differ in how they discover splits.
Aog assemble(const std::vector<std::string>& pieces, const std::vector<Worker>& workers,
             std::vector<PieceSet> node_sets, std::vector<Split> splits,
             const std::vector<std::string>& action_order) {
  std::sort(node_sets.begin(), node_sets.end(), canonical_less);
  node_sets.erase(std::unique(node_sets.begin(), node_sets.end()), node_sets.end());

  const PieceSet full = all_pieces(pieces.size());
  std::unordered_map<PieceSet, NodeId> id_of;
  std::vector<Node> nodes;
  nodes.reserve(node_sets.size());
  for (PieceSet s : node_sets) {
    Node n;
    n.id = static_cast<NodeId>(nodes.size());
    n.pieces = s;
    n.kind = piece_count(s) == 1 ? NodeKind::leaf
                                 : (s == full ? NodeKind::root : NodeKind::internal);
    id_of.emplace(s, n.id);
    nodes.push_back(n);
  }

  struct Proto {
    NodeId parent;
    std::array<NodeId, 2> children;
    std::string action;
  };
  std::vector<Proto> protos;
  protos.reserve(splits.size());
  for (Split& s : splits) {
    NodeId ca = id_of.at(s.a), cb = id_of.at(s.b);
    if (ca > cb) std::swap(ca, cb);
    protos.push_back({id_of.at(s.whole), {ca, cb}, std::move(s.action)});
  }
  std::stable_sort(protos.begin(), protos.end(), [](const Proto& x, const Proto& y) {
    return std::tie(x.parent, x.children) < std::tie(y.parent, y.children);
  });

  std::vector<std::string> actions = action_order;
  std::map<std::string, ActionIndex> action_of;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (!action_of.emplace(actions[i], static_cast<ActionIndex>(i)).second)
      throw Error(ErrorKind::invalid_argument, "duplicate action id '" + actions[i] + "'");
  }
  const bool fixed_order = !action_order.empty();
  std::size_t unnamed = 0;
  for (Proto& p : protos) {
    if (p.action.empty()) p.action = "a" + std::to_string(++unnamed);
    if (!action_of.count(p.action)) {
      if (fixed_order)
        throw Error(ErrorKind::invalid_argument,
                    "action '" + p.action + "' is missing from the explicit action order");
      action_of.emplace(p.action, static_cast<ActionIndex>(actions.size()));
      actions.push_back(p.action);
    }
  }

  std::vector<HyperArc> arcs;
  arcs.reserve(protos.size() * workers.size());
  for (const Proto& p : protos) {
    for (std::size_t w = 0; w < workers.size(); ++w) {
      HyperArc h;
      h.id = static_cast<ArcId>(arcs.size());
      h.parent = p.parent;
      h.children = p.children;
      h.action = action_of.at(p.action);
      h.worker = static_cast<WorkerIndex>(w);
      arcs.push_back(h);
    }
  }
  return Aog(pieces, workers, std::move(actions), std::move(nodes), std::move(arcs));
}

}  // namespace

Aog build_graph(const std::vector<std::string>& pieces, const SplitPredicate& feasible,
                const std::vector<Worker>& workers, const BuildOptions& options) {
  check_pieces_and_workers(pieces, workers);
  if (!feasible) throw Error(ErrorKind::invalid_argument, "split predicate is empty");

  const PieceSet full = all_pieces(pieces.size());
  // Largest sets first so a failure names the node closest to the root.
  auto larger_first = [](PieceSet a, PieceSet b) { return canonical_less(b, a); };
  std::set<PieceSet, decltype(larger_first)> pending(larger_first);
  std::unordered_set<PieceSet> seen{full};
  pending.insert(full);

  std::vector<PieceSet> node_sets;
  std::vector<Split> splits;
  const Aog labels(pieces, workers, {}, {}, {});

  while (!pending.empty()) {
    const PieceSet s = *pending.begin();
    pending.erase(pending.begin());
    node_sets.push_back(s);
    if (piece_count(s) == 1) continue;

    const PieceSet low = s & (~s + 1);
    const PieceSet rest = s ^ low;
    bool any = false;
    for (PieceSet sub = rest;; sub = (sub - 1) & rest) {
      const PieceSet a = low | sub;
      const PieceSet b = s ^ a;
      if (b != 0 && feasible(s, a, b)) {
        any = true;
        splits.push_back({s, a, b, options.namer ? options.namer(s, a, b) : std::string{}});
        for (PieceSet part : {a, b})
          if (seen.insert(part).second) pending.insert(part);
      }
      if (sub == 0) break;
    }
    if (!any)
      throw Error(ErrorKind::validation,
                  "node " + labels.describe(s) + " admits no feasible two-way split");
  }
  return assemble(pieces, workers, std::move(node_sets), std::move(splits), options.action_order);
}

Aog generate_linear_assembly(std::size_t n_pieces, std::size_t n_workers) {
  if (n_pieces == 0) throw Error(ErrorKind::invalid_argument, "linear assembly needs at least one piece");
  if (n_workers == 0) throw Error(ErrorKind::invalid_argument, "linear assembly needs at least one worker");
  if (n_pieces > kMaxPieces) throw Error(ErrorKind::invalid_argument, "at most 64 pieces are supported");

  std::vector<std::string> pieces;
  for (std::size_t i = 1; i <= n_pieces; ++i) pieces.push_back("p" + std::to_string(i));
  std::vector<Worker> workers{{"human", WorkerKind::human}};
  for (std::size_t i = 1; i < n_workers; ++i)
    workers.push_back({"robot" + std::to_string(i), WorkerKind::robot});

  auto interval = [](std::size_t first, std::size_t last) {
    return all_pieces(last + 1) & ~all_pieces(first);
  };
  std::vector<PieceSet> node_sets;
  std::vector<Split> splits;
  for (std::size_t first = 0; first < n_pieces; ++first) {
    for (std::size_t last = first; last < n_pieces; ++last) {
      const PieceSet whole = interval(first, last);
      node_sets.push_back(whole);
      for (std::size_t cut = first; cut < last; ++cut)
        splits.push_back({whole, interval(first, cut), interval(cut + 1, last), {}});
    }
  }
  return assemble(pieces, workers, std::move(node_sets), std::move(splits), {});
}

std::size_t linear_node_count(std::size_t n) { return n * (n + 1) / 2; }

std::size_t linear_arc_count(std::size_t n, std::size_t w) {
  std::size_t per_worker = 0;
  for (std::size_t m = 1; m < n; ++m) per_worker += m * (n - m);
  return per_worker * w;
}

ValidationReport validate(const Aog& g) {
  ValidationReport report;
  auto add = [&](std::string rule, std::string subject, std::string message) {
    report.violations.push_back({std::move(rule), std::move(subject), std::move(message)});
  };
  auto node_subject = [&](NodeId id) { return "node " + std::to_string(id) + " " + g.describe_node(id); };
  auto arc_subject = [](ArcId id) { return "arc " + std::to_string(id); };

  if (g.pieces().empty()) add("pieces", "graph", "piece set is empty");
  {
    std::set<std::string> names(g.pieces().begin(), g.pieces().end());
    if (names.size() != g.pieces().size()) add("pieces", "graph", "piece names are not unique");
  }
  if (g.workers().empty()) add("workers", "graph", "no workers declared");
  {
    std::set<std::string> ids;
    for (const Worker& w : g.workers())
      if (!ids.insert(w.id).second) add("workers", "worker " + w.id, "duplicate worker id");
  }

  const PieceSet full = g.full_set();
  std::map<PieceSet, NodeId> first_with;
  for (const Node& n : g.nodes()) {
    if (n.pieces == 0 || !subset_of(n.pieces, full))
      add("node-pieces", node_subject(n.id), "piece set is empty or names unknown pieces");
    auto [it, fresh] = first_with.emplace(n.pieces, n.id);
    if (!fresh)
      add("unique-pieces", node_subject(n.id),
          "same piece set as node " + std::to_string(it->second));
  }
  for (std::size_t i = 0; i < g.pieces().size(); ++i) {
    if (!first_with.count(PieceSet{1} << i))
      add("leaf-cover", "piece " + g.pieces()[i], "no leaf node for this piece");
  }

  std::vector<char> is_child(g.nodes().size(), 0);
  for (const HyperArc& h : g.arcs()) {
    is_child[h.children[0]] = 1;
    is_child[h.children[1]] = 1;
    const PieceSet pa = g.node(h.children[0]).pieces;
    const PieceSet pb = g.node(h.children[1]).pieces;
    const PieceSet pp = g.node(h.parent).pieces;
    if (h.children[0] == h.children[1] || !disjoint(pa, pb))
      add("arc-children", arc_subject(h.id), "children " + g.describe(pa) + " and " +
                                                  g.describe(pb) + " overlap");
    else if ((pa | pb) != pp)
      add("arc-children", arc_subject(h.id), "children do not union to parent " + g.describe(pp));
    if (h.cost && (!(*h.cost >= 0.0)))
      add("arc-cost", arc_subject(h.id), "cost must be nonnegative");
  }

  std::vector<NodeId> parentless;
  for (const Node& n : g.nodes())
    if (!is_child[n.id]) parentless.push_back(n.id);
  if (parentless.size() != 1) {
    add("root", "graph", "expected exactly one node without a parent, found " +
                             std::to_string(parentless.size()));
  } else if (g.node(parentless.front()).pieces != full) {
    add("root", node_subject(parentless.front()), "root does not contain every piece");
  }

  for (const Node& n : g.nodes()) {
    const bool singleton = piece_count(n.pieces) == 1;
    if (singleton && !g.arcs_into(n.id).empty())
      add("leaf", node_subject(n.id), "leaf node has incoming hyper-arcs");
    if (!singleton && g.arcs_into(n.id).empty())
      add("or-choice", node_subject(n.id), "non-leaf node has no hyper-arc to build it");
  }

  // One copy per worker for each (parent, children, action) group.
  std::map<std::tuple<NodeId, NodeId, NodeId, ActionIndex>, std::vector<ArcId>> groups;
  for (const HyperArc& h : g.arcs())
    groups[{h.parent, h.children[0], h.children[1], h.action}].push_back(h.id);
  for (const auto& [key, ids] : groups) {
    std::vector<int> per_worker(g.workers().size(), 0);
    for (ArcId id : ids) ++per_worker[g.arc(id).worker];
    for (std::size_t w = 0; w < per_worker.size(); ++w) {
      if (per_worker[w] == 1) continue;
      add("worker-duplication", arc_subject(ids.front()),
          "action " + g.action(std::get<3>(key)) + " into " + node_subject(std::get<0>(key)) +
              " has " + std::to_string(per_worker[w]) + " copies for worker " + g.worker(w).id);
    }
  }

  // Cycle check over parent -> child edges (iterative DFS, colors 0/1/2).
  std::vector<int> color(g.nodes().size(), 0);
  for (const Node& start : g.nodes()) {
    if (color[start.id]) continue;
    std::vector<std::pair<NodeId, std::size_t>> stack{{start.id, 0}};
    color[start.id] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      auto in = g.arcs_into(node);
      if (next >= 2 * in.size()) {
        color[node] = 2;
        stack.pop_back();
        continue;
      }
      const NodeId child = g.arc(in[next / 2]).children[next % 2];
      ++next;
      if (color[child] == 1) {
        add("acyclic", node_subject(child), "node is its own ancestor");
        color[child] = 2;
      } else if (color[child] == 0) {
        color[child] = 1;
        stack.push_back({child, 0});
      }
    }
  }
  return report;
}

bool ProgressState::is_solved(NodeId id) const {
  return std::binary_search(solved.begin(), solved.end(), id);
}

ProgressState initial_state(const Aog& graph) {
  ProgressState s;
  s.solved = graph.leaves();
  return s;
}

bool is_complete(const Aog& graph, const ProgressState& state) {
  auto root = graph.root();
  return root && state.solved.size() == 1 && state.solved.front() == *root;
}

bool is_enabled(const Aog& graph, const ProgressState& state, ArcId arc) {
  const HyperArc& h = graph.arc(arc);
  return state.is_solved(h.children[0]) && state.is_solved(h.children[1]);
}

std::vector<ArcId> enabled_arcs(const Aog& graph, const ProgressState& state) {
  std::vector<char> solved(graph.nodes().size(), 0);
  for (NodeId n : state.solved) solved.at(n) = 1;
  std::vector<ArcId> out;
  for (const HyperArc& h : graph.arcs())
    if (solved[h.children[0]] && solved[h.children[1]]) out.push_back(h.id);
  return out;
}

std::optional<ArcId> find_enabled_arc(const Aog& graph, const ProgressState& state,
                                      ActionIndex action, WorkerIndex worker) {
  std::optional<ArcId> found;
  for (ArcId id : enabled_arcs(graph, state)) {
    const HyperArc& h = graph.arc(id);
    if (h.action != action || h.worker != worker) continue;
    if (found)
      throw Error(ErrorKind::invalid_argument, "action '" + graph.action(action) +
                                                   "' is ambiguous: several enabled arcs match");
    found = id;
  }
  return found;
}

ProgressState apply_arc(const ProgressState& state, const Aog& graph, ArcId arc, double t) {
  if (arc >= graph.arcs().size())
    throw Error(ErrorKind::not_found, "unknown arc " + std::to_string(arc));
  const HyperArc& h = graph.arc(arc);
  if (!is_enabled(graph, state, arc))
    throw Error(ErrorKind::not_enabled, "action '" + graph.action(h.action) + "' for worker '" +
                                            graph.worker(h.worker).id +
                                            "' is not enabled: a child sub-assembly is not built");
  ProgressState next = state;
  std::erase_if(next.solved, [&](NodeId n) { return n == h.children[0] || n == h.children[1]; });
  next.solved.insert(std::upper_bound(next.solved.begin(), next.solved.end(), h.parent), h.parent);
  next.history.push_back({h.action, h.worker, h.id, t});
  return next;
}

ProgressState apply_action(const ProgressState& state, const Aog& graph, std::string_view action,
                           std::string_view worker, double t) {
  const ActionIndex a = graph.action_index(action);
  const WorkerIndex w = graph.worker_index(worker);
  auto arc = find_enabled_arc(graph, state, a, w);
  if (!arc)
    throw Error(ErrorKind::not_enabled, "action '" + std::string(action) + "' is not enabled");
  return apply_arc(state, graph, *arc, t);
}

}  // namespace aogalloc
