#include "aogalloc/aog_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "aogalloc/error.hpp"

namespace aogalloc {

using nlohmann::json;

void check_version(const json& doc, int expected, const std::string& what) {
  if (!doc.is_object()) throw Error(ErrorKind::parse, what + ": expected a JSON object");
  if (!doc.contains("v")) return;
  if (!doc["v"].is_number_integer() || doc["v"].get<int>() != expected)
    throw Error(ErrorKind::version_mismatch, what + ": unsupported format version " + doc["v"].dump() +
                                                 " (expected " + std::to_string(expected) + ")");
}

json graph_to_json(const Aog& g) {
  json out;
  out["v"] = kGraphFormatVersion;
  out["pieces"] = json(std::vector<std::string>(g.pieces().begin(), g.pieces().end()));
  out["workers"] = json::array();
  for (const Worker& w : g.workers()) out["workers"].push_back({{"id", w.id}, {"kind", to_string(w.kind)}});
  out["actions"] = json(std::vector<std::string>(g.actions().begin(), g.actions().end()));
  out["nodes"] = json::array();
  for (const Node& n : g.nodes()) {
    json names = json::array();
    for (std::size_t i = 0; i < g.pieces().size(); ++i)
      if (n.pieces & (PieceSet{1} << i)) names.push_back(g.pieces()[i]);
    out["nodes"].push_back({{"id", n.id}, {"pieces", std::move(names)}});
  }
  out["arcs"] = json::array();
  for (const HyperArc& h : g.arcs()) {
    out["arcs"].push_back({{"id", h.id},
                           {"parent", h.parent},
                           {"children", {h.children[0], h.children[1]}},
                           {"action", g.action(h.action)},
                           {"worker", g.worker(h.worker).id},
                           {"cost", h.cost ? json(*h.cost) : json(nullptr)}});
  }
  return out;
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorKind::parse, where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::parse, where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Aog graph_from_json(const json& doc) {
  check_version(doc, kGraphFormatVersion, "graph");
  const auto pieces = field<std::vector<std::string>>(doc, "pieces", "graph");
  if (pieces.size() > kMaxPieces) throw Error(ErrorKind::parse, "graph: more than 64 pieces");
  std::map<std::string, std::size_t> piece_index;
  for (std::size_t i = 0; i < pieces.size(); ++i) piece_index.emplace(pieces[i], i);

  std::vector<Worker> workers;
  for (const json& w : field<json>(doc, "workers", "graph")) {
    const std::string where = "graph.workers[" + std::to_string(workers.size()) + "]";
    workers.push_back({field<std::string>(w, "id", where),
                       parse_worker_kind(field<std::string>(w, "kind", where))});
  }

  std::vector<Node> nodes;
  for (const json& n : field<json>(doc, "nodes", "graph")) {
    const std::string where = "graph.nodes[" + std::to_string(nodes.size()) + "]";
    Node node;
    node.id = field<NodeId>(n, "id", where);
    for (const auto& name : field<std::vector<std::string>>(n, "pieces", where)) {
      auto it = piece_index.find(name);
      if (it == piece_index.end()) throw Error(ErrorKind::parse, where + ": unknown piece '" + name + "'");
      node.pieces |= PieceSet{1} << it->second;
    }
    nodes.push_back(node);
  }
  const PieceSet full = pieces.size() >= 64 ? ~PieceSet{0} : (PieceSet{1} << pieces.size()) - 1;
  for (Node& n : nodes)
    n.kind = piece_count(n.pieces) == 1 ? NodeKind::leaf
                                        : (n.pieces == full ? NodeKind::root : NodeKind::internal);

  std::vector<std::string> actions;
  if (doc.contains("actions")) actions = field<std::vector<std::string>>(doc, "actions", "graph");
  std::map<std::string, ActionIndex> action_of;
  for (std::size_t i = 0; i < actions.size(); ++i) action_of.emplace(actions[i], static_cast<ActionIndex>(i));
  std::map<std::string, WorkerIndex> worker_of;
  for (std::size_t i = 0; i < workers.size(); ++i) worker_of.emplace(workers[i].id, static_cast<WorkerIndex>(i));

  std::vector<HyperArc> arcs;
  for (const json& a : field<json>(doc, "arcs", "graph")) {
    const std::string where = "graph.arcs[" + std::to_string(arcs.size()) + "]";
    HyperArc h;
    h.id = field<ArcId>(a, "id", where);
    h.parent = field<NodeId>(a, "parent", where);
    const auto children = field<std::vector<NodeId>>(a, "children", where);
    if (children.size() != 2) throw Error(ErrorKind::parse, where + ": a hyper-arc has exactly two children");
    h.children = {std::min(children[0], children[1]), std::max(children[0], children[1])};
    const auto action = field<std::string>(a, "action", where);
    auto ait = action_of.find(action);
    if (ait == action_of.end()) {
      if (doc.contains("actions")) throw Error(ErrorKind::parse, where + ": action '" + action + "' not declared");
      ait = action_of.emplace(action, static_cast<ActionIndex>(actions.size())).first;
      actions.push_back(action);
    }
    h.action = ait->second;
    const auto worker = field<std::string>(a, "worker", where);
    auto wit = worker_of.find(worker);
    if (wit == worker_of.end()) throw Error(ErrorKind::parse, where + ": unknown worker '" + worker + "'");
    h.worker = wit->second;
    if (!a.contains("cost")) throw Error(ErrorKind::parse, where + ": missing field 'cost' (use null when unset)");
    if (!a["cost"].is_null()) {
      if (!a["cost"].is_number()) throw Error(ErrorKind::parse, where + ": cost must be a number or null");
      h.cost = a["cost"].get<double>();
    }
    arcs.push_back(h);
  }
  return Aog(pieces, std::move(workers), std::move(actions), std::move(nodes), std::move(arcs));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

Aog load_graph(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return graph_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_graph(const Aog& graph, const std::filesystem::path& path) {
  write_text_file(path, graph_to_json(graph).dump(2) + "\n");
}

}  // namespace aogalloc
