#pragma once

// Online allocation loop. After every completed action the human wear is
// updated (charge while the human works, discharge while the robot works),
// every human hyper-arc is re-costed from a one-step wear prediction, the
// reduced graph is re-planned and the next (action, worker) is suggested.
//
// A Session is a value and a serialized state machine: every mutation appends
// to an ordered event log from which the session can be rebuilt bit-exactly.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "aogalloc/aog.hpp"
#include "aogalloc/ergo.hpp"
#include "aogalloc/planner.hpp"

namespace aogalloc {

enum class ClockMode { logical, wall };

struct SessionConfig {
  CostConfig cost;
  RulaBandTable bands = RulaBandTable::standard();
  std::map<std::string, double> robot_durations;  // seconds per action
  double default_robot_duration_s = 30.0;
  ClockMode clock = ClockMode::logical;
  std::string strong_arm = "right";

  double robot_duration(const std::string& action) const;
  void check() const;
};

nlohmann::json session_config_to_json(const SessionConfig& config);
/// Flat object: cost fields (see cost_config_from_json) plus bands,
/// robot_durations, default_robot_duration_s, clock, strong_arm.
SessionConfig session_config_from_json(const nlohmann::json& doc, const SessionConfig& base = {});

inline constexpr int kEventLogVersion = 1;
inline constexpr int kSnapshotVersion = 1;

struct Event {
  std::uint64_t seq = 0;
  double t = 0.0;
  std::string kind;  // session_start | suggestion | override | completion | wear | assembly_complete
  nlohmann::json payload;
};

nlohmann::json event_to_json(const Event& event);
Event event_from_json(const nlohmann::json& doc);

struct Suggestion {
  std::string action;
  std::string worker;
  ArcId arc = 0;
  double cost = 0.0;
  double plan_cost = 0.0;
  bool overridden = false;
};

struct Allocation {
  std::string action;
  std::string worker;
  WorkerKind kind = WorkerKind::human;
  double cost = 0.0;
};

struct CompletionEvidence {
  std::optional<AngleTrace> angles;
  std::optional<RulaScoreTrace> scores;
  std::optional<double> duration_s;
};

class Session {
 public:
  /// Requires a valid graph with exactly one human worker and a model for
  /// every action the human can perform.
  static Session start(Aog graph, std::map<std::string, ActionModel> models, SessionConfig config,
                       WearVector initial_wear);

  const Aog& graph() const noexcept { return graph_; }
  const ProgressState& progress() const noexcept { return progress_; }
  const WearVector& wear() const noexcept { return wear_; }
  const WearVector& initial_wear() const noexcept { return initial_wear_; }
  const SessionConfig& config() const noexcept { return config_; }
  const std::map<std::string, ActionModel>& models() const noexcept { return models_; }
  double clock() const noexcept { return clock_; }
  const std::vector<Event>& events() const noexcept { return events_; }
  const std::optional<Suggestion>& current_suggestion() const noexcept { return suggestion_; }
  bool complete() const { return is_complete(graph_, progress_); }

  /// Human arcs: human_cost(predict(wear, model)); robot arcs: robot cost.
  ArcCosts recost() const;
  ArcCosts costs_for(const WearVector& wear) const;
  PlanTree current_plan() const;

  Suggestion suggest_next();
  void override_suggestion(std::string_view action, std::string_view worker);
  void complete_action(std::string_view action, std::string_view worker, const CompletionEvidence& evidence = {});

  /// One plan at t = 0 from the initial wear, no updates in between.
  PlanTree offline_plan() const;
  std::vector<Allocation> offline_allocation() const;
  /// Executed (action, worker) pairs so far.
  std::vector<Allocation> online_allocation() const;

  std::string export_log() const;
  /// Rebuilds a session from an exported log and checks every regenerated
  /// event against the recorded one.
  static Session replay(std::istream& log);
  static Session replay(const std::string& log);

  /// Versioned snapshot file body: {v, digest, state, events:[...]}.
  nlohmann::json snapshot() const;
  /// Replays the snapshot's events and checks the digest.
  static Session from_snapshot(const nlohmann::json& doc);

  /// FNV-1a digest over progress, wear, clock, suggestion and event count.
  std::string digest() const;
  /// Wire view: wear, solved set, history, suggestion, plan summary.
  nlohmann::json state_json() const;

 private:
  Session() = default;
  void log(std::string kind, nlohmann::json payload);
  double elapsed_wall_s() const;

  Aog graph_;
  std::map<std::string, ActionModel> models_;
  SessionConfig config_;
  WearVector initial_wear_;
  WearVector wear_;
  ProgressState progress_;
  double clock_ = 0.0;
  std::vector<Event> events_;
  std::optional<Suggestion> suggestion_;
  WorkerIndex human_ = 0;
  std::chrono::steady_clock::time_point last_mutation_{};
};

}  // namespace aogalloc
