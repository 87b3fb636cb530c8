#pragma once

// AND/OR graph of an assembly task with per-worker hyper-arcs.
//
// Nodes are identified by the set of atomic pieces they contain; two
// sub-assemblies with the same pieces are the same node. Every hyper-arc joins
// exactly two disjoint children into their union and exists once per worker.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace aogalloc {

using PieceSet = std::uint64_t;
inline constexpr std::size_t kMaxPieces = 64;

using NodeId = std::uint32_t;
using ArcId = std::uint32_t;
using ActionIndex = std::uint32_t;
using WorkerIndex = std::uint32_t;

inline int piece_count(PieceSet s) noexcept { return __builtin_popcountll(s); }
inline bool disjoint(PieceSet a, PieceSet b) noexcept { return (a & b) == 0; }
inline bool subset_of(PieceSet a, PieceSet b) noexcept { return (a & ~b) == 0; }

enum class NodeKind { leaf, internal, root };
enum class WorkerKind { human, robot };

const char* to_string(NodeKind kind) noexcept;
const char* to_string(WorkerKind kind) noexcept;
WorkerKind parse_worker_kind(std::string_view text);

struct Worker {
  std::string id;
  WorkerKind kind = WorkerKind::human;
};

struct Node {
  NodeId id = 0;
  PieceSet pieces = 0;
  NodeKind kind = NodeKind::internal;
};

struct HyperArc {
  ArcId id = 0;
  NodeId parent = 0;
  std::array<NodeId, 2> children{};  // ascending node ids
  ActionIndex action = 0;
  WorkerIndex worker = 0;
  std::optional<double> cost;  // nullopt = not yet costed
};

/// Per-arc costs indexed by ArcId.
using ArcCosts = std::vector<std::optional<double>>;

/// Immutable AND/OR graph. Construction only indexes the parts; call
/// validate() to check invariants on graphs that did not come from the
/// builders below.
class Aog {
 public:
  Aog() = default;
  Aog(std::vector<std::string> pieces, std::vector<Worker> workers,
      std::vector<std::string> actions, std::vector<Node> nodes,
      std::vector<HyperArc> arcs);

  std::span<const std::string> pieces() const { return pieces_; }
  std::span<const Worker> workers() const { return workers_; }
  std::span<const std::string> actions() const { return actions_; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const HyperArc> arcs() const { return arcs_; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const HyperArc& arc(ArcId id) const { return arcs_.at(id); }
  const Worker& worker(WorkerIndex w) const { return workers_.at(w); }
  const std::string& action(ActionIndex a) const { return actions_.at(a); }

  /// Hyper-arcs whose parent is `id` (the OR alternatives for building it).
  std::span<const ArcId> arcs_into(NodeId id) const { return arcs_into_.at(id); }

  PieceSet full_set() const noexcept { return full_set_; }
  std::optional<NodeId> find_node(PieceSet pieces) const;
  std::optional<NodeId> root() const { return find_node(full_set_); }
  std::vector<NodeId> leaves() const;

  std::optional<ActionIndex> find_action(std::string_view id) const;
  std::optional<WorkerIndex> find_worker(std::string_view id) const;
  ActionIndex action_index(std::string_view id) const;  // throws not_found
  WorkerIndex worker_index(std::string_view id) const;  // throws not_found

  ArcCosts costs() const;
  bool fully_costed() const;
  /// Copy with every arc cost replaced; `costs.size()` must equal arcs().size().
  Aog with_costs(const ArcCosts& costs) const;

  /// "{p1,p2}" style label using piece names.
  std::string describe(PieceSet pieces) const;
  std::string describe_node(NodeId id) const { return describe(node(id).pieces); }

 private:
  std::vector<std::string> pieces_;
  std::vector<Worker> workers_;
  std::vector<std::string> actions_;
  std::vector<Node> nodes_;
  std::vector<HyperArc> arcs_;
  std::vector<std::vector<ArcId>> arcs_into_;
  std::unordered_map<PieceSet, NodeId> by_pieces_;
  PieceSet full_set_ = 0;
};

/// Decides whether `whole` may be assembled by joining `part_a` and `part_b`.
using SplitPredicate = std::function<bool(PieceSet whole, PieceSet part_a, PieceSet part_b)>;
/// Names the action that joins `part_a` and `part_b` into `whole`.
using ActionNamer = std::function<std::string(PieceSet whole, PieceSet part_a, PieceSet part_b)>;

struct BuildOptions {
  ActionNamer namer;                         // default: "a1", "a2", ... per distinct split
  std::vector<std::string> action_order;     // optional explicit ordering of action ids
};

/// Expands every node reachable from the full piece set through feasible
/// two-way splits. Each split becomes one hyper-arc per worker, uncosted.
Aog build_graph(const std::vector<std::string>& pieces, const SplitPredicate& feasible,
                const std::vector<Worker>& workers, const BuildOptions& options = {});

/// Pieces p1..pn where only adjacent pieces interconnect: nodes are all
/// contiguous intervals, arcs all interval splits times workers. Worker 0 is a
/// human ("human"), the others robots ("robot1", ...).
Aog generate_linear_assembly(std::size_t n_pieces, std::size_t n_workers);

/// Closed-form sizes of generate_linear_assembly.
std::size_t linear_node_count(std::size_t n_pieces);
std::size_t linear_arc_count(std::size_t n_pieces, std::size_t n_workers);

struct Violation {
  std::string rule;
  std::string subject;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate(const Aog& graph);

struct HistoryEntry {
  ActionIndex action = 0;
  WorkerIndex worker = 0;
  ArcId arc = 0;
  double t = 0.0;
};

/// Sub-assemblies currently built. Value type: applying an action yields a new state.
struct ProgressState {
  std::vector<NodeId> solved;  // ascending
  std::vector<HistoryEntry> history;

  bool is_solved(NodeId id) const;
  bool operator==(const ProgressState&) const = default;
};

ProgressState initial_state(const Aog& graph);
bool is_complete(const Aog& graph, const ProgressState& state);

/// Arcs whose two children are both built.
std::vector<ArcId> enabled_arcs(const Aog& graph, const ProgressState& state);
bool is_enabled(const Aog& graph, const ProgressState& state, ArcId arc);

ProgressState apply_arc(const ProgressState& state, const Aog& graph, ArcId arc, double t = 0.0);
/// Resolves the unique enabled arc for (action, worker) and applies it.
ProgressState apply_action(const ProgressState& state, const Aog& graph,
                           std::string_view action, std::string_view worker, double t = 0.0);
std::optional<ArcId> find_enabled_arc(const Aog& graph, const ProgressState& state,
                                      ActionIndex action, WorkerIndex worker);

}  // namespace aogalloc
