#pragma once

// Corner-joint cooperative assembly and the scenario file format used by
// `aogalloc replay`.
//
// Pieces: CJ (corner joint), BENCH (its target location on the workbench),
// S1, S2 (long profiles), L (short profile), TABLE (the drop-off table).
// Pick-and-place actions are joins with a fixture piece:
//   a1  CJ + BENCH
//   a2  S1 + any CJ sub-assembly      a3  S2 + ...      a4  L + ...
//   a5  complete frame + TABLE

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aogalloc/session.hpp"

namespace aogalloc {

/// Workers: "human" (human) and "robot" (robot).
Aog corner_joint_graph();

struct ScriptedStep {
  std::string action;
  std::string worker;  // empty: accept the suggested worker
  CompletionEvidence evidence;
};

struct Scenario {
  std::string name;
  Aog graph;
  std::map<std::string, ActionModel> models;
  SessionConfig config;
  WearVector initial_wear;
  /// Empty: follow every suggestion until the assembly is complete.
  std::vector<ScriptedStep> steps;
};

/// Pinned replay fixture for the corner-joint experiment: initial wear
/// (0.3, 0.1, 0.1, 0.45, 0.5), default cost config, calibrated alpha table and
/// robot durations chosen so the online loop allocates H, R, H, H, R.
Scenario corner_joint_scenario();

inline constexpr int kScenarioFormatVersion = 1;

/// Relative file references (calibration_file, graph_file, angles_file) are
/// resolved against `base_dir`.
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

struct ScenarioRun {
  Session session;
  std::vector<Allocation> online;
  std::vector<Allocation> offline;
  std::vector<Suggestion> suggestions;
};

ScenarioRun run_scenario(const Scenario& scenario);

/// Two-row table (OFFLINE / ONLINE) over the executed actions.
std::string format_allocation_table(const ScenarioRun& run);

}  // namespace aogalloc
