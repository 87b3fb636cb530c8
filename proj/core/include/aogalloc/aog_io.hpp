#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "aogalloc/aog.hpp"

namespace aogalloc {

inline constexpr int kGraphFormatVersion = 1;

/// {v, pieces, workers:[{id,kind}], actions, nodes:[{id,pieces}],
///  arcs:[{id,parent,children,action,worker,cost|null}]}
nlohmann::json graph_to_json(const Aog& graph);
/// Structural parse only; run validate() for invariants. `actions` is optional
/// and defaults to first-appearance order over the arcs.
Aog graph_from_json(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Aog load_graph(const std::filesystem::path& path);
void save_graph(const Aog& graph, const std::filesystem::path& path);

/// Throws version_mismatch unless doc["v"] is absent or equals `expected`.
void check_version(const nlohmann::json& doc, int expected, const std::string& what);

}  // namespace aogalloc
