#include "aogalloc/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "aogalloc/aog_io.hpp"
#include "aogalloc/ergo_io.hpp"
#include "aogalloc/error.hpp"

namespace aogalloc {

using nlohmann::json;

double SessionConfig::robot_duration(const std::string& action) const {
  auto it = robot_durations.find(action);
  return it == robot_durations.end() ? default_robot_duration_s : it->second;
}

void SessionConfig::check() const {
  cost.check();
  bands.check();
  if (!(default_robot_duration_s >= 0.0))
    throw Error(ErrorKind::validation, "default robot duration must be nonnegative");
  for (const auto& [action, d] : robot_durations)
    if (!(d >= 0.0)) throw Error(ErrorKind::validation, "robot duration for " + action + " must be nonnegative");
}

json session_config_to_json(const SessionConfig& c) {
  json out = cost_config_to_json(c.cost);
  out["bands"] = bands_to_json(c.bands);
  out["robot_durations"] = c.robot_durations;
  out["default_robot_duration_s"] = c.default_robot_duration_s;
  out["clock"] = c.clock == ClockMode::logical ? "logical" : "wall";
  out["strong_arm"] = c.strong_arm;
  return out;
}

SessionConfig session_config_from_json(const json& doc, const SessionConfig& base) {
  if (!doc.is_object()) throw Error(ErrorKind::parse, "config: expected an object");
  SessionConfig c = base;
  c.cost = cost_config_from_json(doc, base.cost);
  if (doc.contains("bands")) c.bands = bands_from_json(doc["bands"]);
  if (doc.contains("sigmoid_steepness")) {
    if (!doc["sigmoid_steepness"].is_number()) throw Error(ErrorKind::parse, "config: sigmoid_steepness must be a number");
    c.bands.steepness_per_deg = doc["sigmoid_steepness"].get<double>();
  }
  try {
    if (doc.contains("robot_durations")) {
      for (const auto& [action, d] : doc["robot_durations"].items()) c.robot_durations[action] = d.get<double>();
    }
    if (doc.contains("default_robot_duration_s"))
      c.default_robot_duration_s = doc["default_robot_duration_s"].get<double>();
    if (doc.contains("strong_arm")) c.strong_arm = doc["strong_arm"].get<std::string>();
    if (doc.contains("clock")) {
      const auto mode = doc["clock"].get<std::string>();
      if (mode == "logical")
        c.clock = ClockMode::logical;
      else if (mode == "wall")
        c.clock = ClockMode::wall;
      else
        throw Error(ErrorKind::parse, "config: clock must be 'logical' or 'wall'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("config: ") + e.what());
  }
  if (c.strong_arm != "right" && c.strong_arm != "left")
    throw Error(ErrorKind::parse, "config: strong_arm must be 'right' or 'left'");
  c.check();
  return c;
}

json event_to_json(const Event& e) {
  return {{"v", kEventLogVersion}, {"seq", e.seq}, {"t", e.t}, {"kind", e.kind}, {"payload", e.payload}};
}

Event event_from_json(const json& doc) {
  check_version(doc, kEventLogVersion, "event");
  try {
    Event e;
    e.seq = doc.at("seq").get<std::uint64_t>();
    e.t = doc.at("t").get<double>();
    e.kind = doc.at("kind").get<std::string>();
    e.payload = doc.at("payload");
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::parse, std::string("event: ") + ex.what());
  }
}

namespace {

json models_to_json(const std::map<std::string, ActionModel>& models) {
  json out = json::object();
  for (const auto& [action, m] : models)
    out[action] = {{"alpha", per_joint_to_json(m.alpha)}, {"duration_s", m.nominal_duration_s}};
  return out;
}

std::map<std::string, ActionModel> models_from_json(const json& doc) {
  std::map<std::string, ActionModel> out;
  for (const auto& [action, entry] : doc.items()) {
    ActionModel m;
    m.action = action;
    m.alpha = per_joint_from_json(entry.at("alpha"), "model " + action);
    m.nominal_duration_s = entry.at("duration_s").get<double>();
    out.emplace(action, m);
  }
  return out;
}

json evidence_to_json(const CompletionEvidence& ev) {
  json out = json::object();
  if (ev.angles) out["angles"] = angle_trace_to_json(*ev.angles);
  if (ev.scores) out["scores"] = score_trace_to_json(*ev.scores);
  return out;
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

Session Session::start(Aog graph, std::map<std::string, ActionModel> models, SessionConfig config,
                       WearVector initial_wear) {
  const ValidationReport report = validate(graph);
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    throw Error(ErrorKind::validation, "graph is invalid: " + v.subject + ": " + v.message + " [" + v.rule + "]");
  }
  config.check();
  check_wear(initial_wear);

  std::optional<WorkerIndex> human;
  for (std::size_t w = 0; w < graph.workers().size(); ++w) {
    if (graph.worker(w).kind != WorkerKind::human) continue;
    if (human) throw Error(ErrorKind::validation, "exactly one human worker is supported");
    human = static_cast<WorkerIndex>(w);
  }
  if (!human) throw Error(ErrorKind::validation, "the graph has no human worker");

  for (auto& [action, m] : models) {
    if (m.action.empty()) m.action = action;
    m.check();
  }
  for (const HyperArc& h : graph.arcs()) {
    if (h.worker == *human && !models.count(graph.action(h.action)))
      throw Error(ErrorKind::validation, "missing action model for '" + graph.action(h.action) + "'");
  }

  Session s;
  s.graph_ = std::move(graph);
  s.models_ = std::move(models);
  s.config_ = std::move(config);
  initial_wear.t = 0.0;
  s.initial_wear_ = initial_wear;
  s.wear_ = initial_wear;
  s.progress_ = initial_state(s.graph_);
  s.human_ = *human;
  s.last_mutation_ = std::chrono::steady_clock::now();
  s.log("session_start", {{"graph", graph_to_json(s.graph_)},
                          {"models", models_to_json(s.models_)},
                          {"config", session_config_to_json(s.config_)},
                          {"initial_wear", wear_to_json(s.initial_wear_)}});
  return s;
}

void Session::log(std::string kind, json payload) {
  events_.push_back({events_.size(), clock_, std::move(kind), std::move(payload)});
  last_mutation_ = std::chrono::steady_clock::now();
}

double Session::elapsed_wall_s() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - last_mutation_).count();
}

ArcCosts Session::costs_for(const WearVector& wear) const {
  ArcCosts costs(graph_.arcs().size());
  std::map<ActionIndex, double> human_cost_of;
  for (const HyperArc& h : graph_.arcs()) {
    if (graph_.worker(h.worker).kind == WorkerKind::robot) {
      costs[h.id] = config_.cost.robot_cost;
      continue;
    }
    auto it = human_cost_of.find(h.action);
    if (it == human_cost_of.end()) {
      auto m = models_.find(graph_.action(h.action));
      if (m == models_.end())
        throw Error(ErrorKind::not_found, "missing action model for '" + graph_.action(h.action) + "'");
      it = human_cost_of.emplace(h.action, human_cost(predict(wear, m->second), config_.cost)).first;
    }
    costs[h.id] = it->second;
  }
  return costs;
}

ArcCosts Session::recost() const { return costs_for(wear_); }

PlanTree Session::current_plan() const { return replan(graph_, progress_, recost()); }

Suggestion Session::suggest_next() {
  if (complete()) throw Error(ErrorKind::not_enabled, "assembly already complete");
  const PlanTree plan = current_plan();
  const PlanStep step = next_action(plan, progress_);
  Suggestion s{graph_.action(step.action), graph_.worker(step.worker).id, step.arc, step.cost, plan.total_cost, false};
  json steps = json::array();
  for (const PlanStep& p : plan.steps)
    steps.push_back({{"action", graph_.action(p.action)}, {"worker", graph_.worker(p.worker).id}, {"cost", p.cost}});
  suggestion_ = s;
  log("suggestion", {{"action", s.action},
                     {"worker", s.worker},
                     {"arc", s.arc},
                     {"cost", s.cost},
                     {"plan_cost", s.plan_cost},
                     {"plan", std::move(steps)}});
  return s;
}

void Session::override_suggestion(std::string_view action, std::string_view worker) {
  const ActionIndex a = graph_.action_index(action);
  const WorkerIndex w = graph_.worker_index(worker);
  const auto arc = find_enabled_arc(graph_, progress_, a, w);
  if (!arc) throw Error(ErrorKind::not_enabled, "cannot override: action '" + std::string(action) + "' is not enabled");
  const ArcCosts costs = recost();
  json replaced = suggestion_ ? json{{"action", suggestion_->action}, {"worker", suggestion_->worker}} : json(nullptr);
  suggestion_ = Suggestion{std::string(action), std::string(worker), *arc, *costs[*arc],
                           suggestion_ ? suggestion_->plan_cost : 0.0, true};
  log("override", {{"action", suggestion_->action},
                   {"worker", suggestion_->worker},
                   {"arc", *arc},
                   {"cost", suggestion_->cost},
                   {"replaced", std::move(replaced)}});
}

void Session::complete_action(std::string_view action, std::string_view worker, const CompletionEvidence& ev) {
  const ActionIndex a = graph_.action_index(action);
  const WorkerIndex w = graph_.worker_index(worker);
  const auto arc = find_enabled_arc(graph_, progress_, a, w);
  if (!arc) throw Error(ErrorKind::not_enabled, "action '" + std::string(action) + "' is not enabled");
  if (ev.duration_s && !(*ev.duration_s >= 0.0))
    throw Error(ErrorKind::invalid_argument, "duration must be nonnegative");

  const double capacity = config_.cost.capacity();
  const WearVector before = wear_;
  WearVector after = wear_;
  double duration = 0.0;
  std::string source;
  std::optional<double> model_error;

  if (graph_.worker(w).kind == WorkerKind::human) {
    const ActionModel& model = models_.at(std::string(action));
    std::optional<RulaScoreTrace> scores = ev.scores;
    if (ev.angles) scores = score_angle_trace(*ev.angles, config_.bands);
    if (scores) {
      if (scores->samples.empty()) throw Error(ErrorKind::invalid_argument, "evidence trace is empty");
      after = integrate_wear(wear_, *scores, capacity).back();
      duration = scores->samples.back().t - scores->samples.front().t;
      source = "trace";
      const WearVector predicted = predict(wear_, model);
      double worst = 0.0;
      for (std::size_t j = 0; j < kJointCount; ++j)
        worst = std::max(worst, std::abs(after.values[j] - predicted.values[j]));
      model_error = worst;
    } else {
      after = predict(wear_, model);
      source = "model";
      duration = ev.duration_s ? *ev.duration_s
                               : (config_.clock == ClockMode::wall ? elapsed_wall_s() : model.nominal_duration_s);
    }
  } else {
    duration = ev.duration_s ? *ev.duration_s
                             : (config_.clock == ClockMode::wall ? elapsed_wall_s()
                                                                 : config_.robot_duration(std::string(action)));
    after = recover(wear_, duration, config_.cost.recovery_rate, capacity);
    source = "recovery";
  }

  clock_ += duration;
  after.t = clock_;
  wear_ = after;
  progress_ = apply_arc(progress_, graph_, *arc, clock_);
  suggestion_.reset();

  json payload = {{"action", std::string(action)},
                  {"worker", std::string(worker)},
                  {"arc", *arc},
                  {"duration_s", duration},
                  {"source", source},
                  {"wear_before", wear_to_json(before)},
                  {"wear", wear_to_json(after)}};
  if (ev.angles || ev.scores) payload["evidence"] = evidence_to_json(ev);
  if (model_error) payload["model_error"] = *model_error;
  log("completion", std::move(payload));
  log("wear", wear_to_json(wear_));
  if (complete()) log("assembly_complete", json::object());
}

PlanTree Session::offline_plan() const {
  return replan(graph_, initial_state(graph_), costs_for(initial_wear_));
}

std::vector<Allocation> Session::offline_allocation() const {
  std::vector<Allocation> out;
  for (const PlanStep& s : offline_plan().steps)
    out.push_back({graph_.action(s.action), graph_.worker(s.worker).id, graph_.worker(s.worker).kind, s.cost});
  return out;
}

std::vector<Allocation> Session::online_allocation() const {
  std::vector<Allocation> out;
  for (const Event& e : events_) {
    if (e.kind != "completion") continue;
    const std::string worker = e.payload.at("worker").get<std::string>();
    out.push_back({e.payload.at("action").get<std::string>(), worker,
                   graph_.worker(graph_.worker_index(worker)).kind, 0.0});
  }
  // Attach the cost the planner saw when it suggested each action.
  std::size_t k = 0;
  for (const Event& e : events_) {
    if (k >= out.size()) break;
    if ((e.kind == "suggestion" || e.kind == "override") && e.payload.at("action") == out[k].action &&
        e.payload.at("worker") == out[k].worker)
      out[k].cost = e.payload.at("cost").get<double>();
    if (e.kind == "completion") ++k;
  }
  return out;
}

std::string Session::export_log() const {
  std::string out;
  for (const Event& e : events_) {
    out += event_to_json(e).dump();
    out += '\n';
  }
  return out;
}

Session Session::replay(const std::string& log) {
  std::istringstream in(log);
  return replay(in);
}

Session Session::replay(std::istream& in) {
  std::vector<Event> recorded;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      recorded.push_back(event_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse, "event log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (recorded.empty() || recorded.front().kind != "session_start")
    throw Error(ErrorKind::parse, "event log must begin with a session_start event");

  const json& start = recorded.front().payload;
  Session s = [&] {
    try {
      return Session::start(graph_from_json(start.at("graph")), models_from_json(start.at("models")),
                            session_config_from_json(start.at("config")), wear_from_json(start.at("initial_wear")));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, std::string("session_start payload: ") + e.what());
    }
  }();

  for (std::size_t i = 1; i < recorded.size(); ++i) {
    const Event& e = recorded[i];
    try {
      if (e.kind == "suggestion") {
        const Suggestion got = s.suggest_next();
        if (got.action != e.payload.at("action") || got.worker != e.payload.at("worker"))
          throw Error(ErrorKind::validation, "replay diverged at event " + std::to_string(e.seq) +
                                                 ": suggested " + got.action + "/" + got.worker);
      } else if (e.kind == "override") {
        s.override_suggestion(e.payload.at("action").get<std::string>(), e.payload.at("worker").get<std::string>());
      } else if (e.kind == "completion") {
        CompletionEvidence ev;
        ev.duration_s = e.payload.at("duration_s").get<double>();
        if (e.payload.contains("evidence")) {
          const json& x = e.payload["evidence"];
          if (x.contains("angles")) ev.angles = angle_trace_from_json(x["angles"]);
          if (x.contains("scores")) ev.scores = score_trace_from_json(x["scores"]);
        }
        s.complete_action(e.payload.at("action").get<std::string>(), e.payload.at("worker").get<std::string>(), ev);
      } else if (e.kind != "wear" && e.kind != "assembly_complete") {
        throw Error(ErrorKind::parse, "unknown event kind '" + e.kind + "'");
      }
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::parse, "event " + std::to_string(e.seq) + ": " + ex.what());
    }
  }

  if (s.events_.size() != recorded.size())
    throw Error(ErrorKind::validation, "replay produced " + std::to_string(s.events_.size()) + " events, log has " +
                                           std::to_string(recorded.size()));
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    const Event& a = s.events_[i];
    const Event& b = recorded[i];
    if (a.seq != b.seq || a.kind != b.kind || a.t != b.t || a.payload != b.payload)
      throw Error(ErrorKind::validation, "replay diverged at event " + std::to_string(b.seq) + " (" + b.kind + ")");
  }
  return s;
}

json Session::snapshot() const {
  json events = json::array();
  for (const Event& e : events_) events.push_back(event_to_json(e));
  return {{"v", kSnapshotVersion}, {"digest", digest()}, {"state", state_json()}, {"events", std::move(events)}};
}

Session Session::from_snapshot(const json& doc) {
  check_version(doc, kSnapshotVersion, "snapshot");
  if (!doc.contains("events") || !doc["events"].is_array())
    throw Error(ErrorKind::parse, "snapshot: missing 'events' array");
  std::string log;
  for (const json& e : doc["events"]) log += e.dump() + '\n';
  Session s = replay(log);
  if (doc.contains("digest") && doc["digest"] != s.digest())
    throw Error(ErrorKind::validation, "snapshot digest mismatch: file has " + doc["digest"].dump() + ", replay gives " +
                                           s.digest());
  return s;
}

std::string Session::digest() const {
  std::string canon;
  canon += "solved:";
  for (NodeId n : progress_.solved) canon += std::to_string(n) + ',';
  canon += "|history:";
  for (const HistoryEntry& h : progress_.history)
    canon += std::to_string(h.action) + '/' + std::to_string(h.worker) + '/' + std::to_string(h.arc) + '@' +
             hexfloat(h.t) + ',';
  canon += "|wear:";
  for (double v : wear_.values) canon += hexfloat(v) + ',';
  canon += hexfloat(wear_.t);
  canon += "|clock:" + hexfloat(clock_);
  if (suggestion_) canon += "|suggestion:" + suggestion_->action + '/' + suggestion_->worker;
  canon += "|events:" + std::to_string(events_.size());

  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json Session::state_json() const {
  json solved = json::array();
  for (NodeId n : progress_.solved) {
    json names = json::array();
    for (std::size_t i = 0; i < graph_.pieces().size(); ++i)
      if (graph_.node(n).pieces & (PieceSet{1} << i)) names.push_back(graph_.pieces()[i]);
    solved.push_back({{"id", n}, {"pieces", std::move(names)}});
  }
  json history = json::array();
  for (const HistoryEntry& h : progress_.history)
    history.push_back({{"action", graph_.action(h.action)}, {"worker", graph_.worker(h.worker).id}, {"t", h.t}});

  json out;
  out["v"] = kEventLogVersion;
  out["complete"] = complete();
  out["clock"] = clock_;
  out["wear"] = wear_to_json(wear_);
  out["thresholds"] = {{"v_th1", config_.cost.v_th1}, {"v_th2", config_.cost.v_th2}};
  out["strong_arm"] = config_.strong_arm;
  out["solved"] = std::move(solved);
  out["history"] = std::move(history);
  out["events"] = events_.size();
  out["digest"] = digest();
  if (suggestion_) {
    out["suggestion"] = {{"action", suggestion_->action},
                         {"worker", suggestion_->worker},
                         {"cost", suggestion_->cost},
                         {"overridden", suggestion_->overridden}};
  } else {
    out["suggestion"] = nullptr;
  }
  if (complete()) {
    out["plan"] = nullptr;
  } else {
    out["plan"] = plan_to_json(graph_, current_plan());
  }
  return out;
}

}  // namespace aogalloc
