#include "aogalloc/scenarios.hpp"

#include <iomanip>
#include <sstream>

#include "aogalloc/aog_io.hpp"
#include "aogalloc/calibration.hpp"
#include "aogalloc/ergo_io.hpp"
#include "aogalloc/error.hpp"

namespace aogalloc {

using nlohmann::json;

namespace {

constexpr PieceSet kCJ = 1 << 0;
constexpr PieceSet kBench = 1 << 1;
constexpr PieceSet kS1 = 1 << 2;
constexpr PieceSet kS2 = 1 << 3;
constexpr PieceSet kL = 1 << 4;
constexpr PieceSet kTable = 1 << 5;
constexpr PieceSet kCore = kCJ | kBench;
constexpr PieceSet kProfiles = kS1 | kS2 | kL;

bool corner_joint_split(PieceSet whole, PieceSet a, PieceSet b) {
  if (whole == kCore) return true;  // a1: only split of {CJ, BENCH}
  for (auto [single, rest] : {std::pair{a, b}, std::pair{b, a}}) {
    if (single == kTable) return rest == (kCore | kProfiles);
    if ((single & kProfiles) && piece_count(single) == 1)
      return subset_of(kCore, rest) && !(rest & kTable);
  }
  return false;
}

std::string corner_joint_action(PieceSet whole, PieceSet a, PieceSet b) {
  if (whole == kCore) return "a1";
  const PieceSet single = piece_count(a) == 1 ? a : b;
  switch (single) {
    case kS1: return "a2";
    case kS2: return "a3";
    case kL: return "a4";
    default: return "a5";
  }
}

std::string kind_label(WorkerKind k) { return k == WorkerKind::human ? "Human" : "Robot"; }

}  // namespace

Aog corner_joint_graph() {
  BuildOptions options;
  options.namer = corner_joint_action;
  options.action_order = {"a1", "a2", "a3", "a4", "a5"};
  return build_graph({"CJ", "BENCH", "S1", "S2", "L", "TABLE"}, corner_joint_split,
                     {{"human", WorkerKind::human}, {"robot", WorkerKind::robot}}, options);
}

Scenario corner_joint_scenario() {
  Scenario s;
  s.name = "corner-joint";
  s.graph = corner_joint_graph();
  // Alpha per joint (shoulder, elbow, wrist, trunk, neck). a1..a3 share the
  // same reach-and-pick motion, a4 is the lightest (shoulder barely used), a5
  // the most wearing.
  const PerJoint<double> reach{0.89, 0.89, 0.96, 0.92, 0.90};
  s.models["a1"] = {"a1", reach, 12.0};
  s.models["a2"] = {"a2", reach, 14.0};
  s.models["a3"] = {"a3", reach, 14.0};
  s.models["a4"] = {"a4", {0.93, 0.90, 0.98, 0.93, 0.93}, 9.0};
  s.models["a5"] = {"a5", {0.82, 0.87, 0.90, 0.89, 0.84}, 22.0};
  s.config.robot_durations = {{"a1", 20.0}, {"a2", 105.0}, {"a3", 105.0}, {"a4", 60.0}, {"a5", 45.0}};
  s.initial_wear.values = {0.3, 0.1, 0.1, 0.45, 0.5};
  return s;
}

Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
  check_version(doc, kScenarioFormatVersion, "scenario");
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  Scenario s;
  s.name = doc.value("name", "scenario");

  if (doc.contains("graph_file")) {
    s.graph = load_graph(resolve(doc["graph_file"].get<std::string>()));
  } else if (doc.contains("graph") && doc["graph"].is_string()) {
    if (doc["graph"] != "corner-joint")
      throw Error(ErrorKind::parse, "scenario: unknown builtin graph " + doc["graph"].dump());
    s.graph = corner_joint_graph();
  } else if (doc.contains("graph")) {
    s.graph = graph_from_json(doc["graph"]);
  } else {
    throw Error(ErrorKind::parse, "scenario: missing 'graph' or 'graph_file'");
  }

  json calibration;
  if (doc.contains("calibration_file"))
    calibration = read_json_file(resolve(doc["calibration_file"].get<std::string>()));
  else if (doc.contains("calibration"))
    calibration = doc["calibration"];
  else
    throw Error(ErrorKind::parse, "scenario: missing 'calibration' or 'calibration_file'");
  s.models = models_from_calibration(calibration_from_json(calibration));

  if (doc.contains("config")) s.config = session_config_from_json(doc["config"]);
  if (!doc.contains("initial_wear")) throw Error(ErrorKind::parse, "scenario: missing 'initial_wear'");
  s.initial_wear = wear_from_json(doc["initial_wear"]);

  if (doc.contains("steps")) {
    if (!doc["steps"].is_array()) throw Error(ErrorKind::parse, "scenario: 'steps' must be an array");
    for (std::size_t i = 0; i < doc["steps"].size(); ++i) {
      const json& st = doc["steps"][i];
      const std::string where = "scenario.steps[" + std::to_string(i) + "]";
      if (!st.contains("action") || !st["action"].is_string())
        throw Error(ErrorKind::parse, where + ": missing 'action'");
      ScriptedStep step;
      step.action = st["action"].get<std::string>();
      step.worker = st.value("worker", "");
      if (st.contains("duration_s")) step.evidence.duration_s = st["duration_s"].get<double>();
      if (st.contains("angles_file")) step.evidence.angles = load_angle_trace(resolve(st["angles_file"].get<std::string>()));
      if (st.contains("angles")) step.evidence.angles = angle_trace_from_json(st["angles"]);
      if (st.contains("scores")) step.evidence.scores = score_trace_from_json(st["scores"]);
      s.steps.push_back(std::move(step));
    }
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  std::vector<ActionCalibration> cal;
  for (const auto& [action, m] : s.models) cal.push_back({m, {}, 0});
  json out;
  out["v"] = kScenarioFormatVersion;
  out["name"] = s.name;
  out["graph"] = graph_to_json(s.graph);
  out["calibration"] = calibration_to_json(cal);
  out["config"] = session_config_to_json(s.config);
  json wear = wear_to_json(s.initial_wear);
  wear.erase("t");
  out["initial_wear"] = std::move(wear);
  if (!s.steps.empty()) {
    json steps = json::array();
    for (const ScriptedStep& st : s.steps) {
      json j = {{"action", st.action}};
      if (!st.worker.empty()) j["worker"] = st.worker;
      if (st.evidence.duration_s) j["duration_s"] = *st.evidence.duration_s;
      if (st.evidence.angles) j["angles"] = angle_trace_to_json(*st.evidence.angles);
      if (st.evidence.scores) j["scores"] = score_trace_to_json(*st.evidence.scores);
      steps.push_back(std::move(j));
    }
    out["steps"] = std::move(steps);
  }
  return out;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return scenario_from_json(doc, path.parent_path());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

ScenarioRun run_scenario(const Scenario& scenario) {
  ScenarioRun run{Session::start(scenario.graph, scenario.models, scenario.config, scenario.initial_wear), {}, {}, {}};
  Session& s = run.session;
  if (scenario.steps.empty()) {
    while (!s.complete()) {
      const Suggestion sug = s.suggest_next();
      run.suggestions.push_back(sug);
      s.complete_action(sug.action, sug.worker);
    }
  } else {
    for (const ScriptedStep& step : scenario.steps) {
      const Suggestion sug = s.suggest_next();
      run.suggestions.push_back(sug);
      const std::string worker = step.worker.empty() ? sug.worker : step.worker;
      if (step.action != sug.action || worker != sug.worker) s.override_suggestion(step.action, worker);
      s.complete_action(step.action, worker, step.evidence);
    }
  }
  run.online = s.online_allocation();
  run.offline = s.offline_allocation();
  return run;
}

std::string format_allocation_table(const ScenarioRun& run) {
  std::ostringstream out;
  const int width = 8;
  out << std::left << std::setw(width) << "";
  for (const Allocation& a : run.online) out << std::setw(width) << a.action;
  out << '\n' << std::setw(width) << "OFFLINE";
  for (const Allocation& a : run.online) {
    std::string label = "-";
    for (const Allocation& o : run.offline)
      if (o.action == a.action) {
        label = kind_label(o.kind);
        break;
      }
    out << std::setw(width) << label;
  }
  out << '\n' << std::setw(width) << "ONLINE";
  for (const Allocation& a : run.online) out << std::setw(width) << kind_label(a.kind);
  out << '\n';
  return out.str();
}

}  // namespace aogalloc
