#include <gtest/gtest.h>

#include <cmath>

#include "aogalloc/error.hpp"
#include "aogalloc/scenarios.hpp"
#include "aogalloc/session.hpp"

using namespace aogalloc;
using nlohmann::json;

namespace {

WearVector uniform(double v) {
  WearVector w;
  w.values.fill(v);
  return w;
}

std::map<std::string, ActionModel> models_for(const Aog& g, double alpha, double duration = 10.0) {
  std::map<std::string, ActionModel> out;
  for (const std::string& a : g.actions()) {
    ActionModel m;
    m.action = a;
    m.alpha.fill(alpha);
    m.nominal_duration_s = duration;
    out.emplace(a, m);
  }
  return out;
}

Session fixture_session() {
  const Scenario sc = corner_joint_scenario();
  return Session::start(sc.graph, sc.models, sc.config, sc.initial_wear);
}

double human_arc_cost(const Session& s, const std::string& action) {
  const ArcCosts costs = s.recost();
  const Aog& g = s.graph();
  for (const HyperArc& h : g.arcs())
    if (g.action(h.action) == action && g.worker(h.worker).kind == WorkerKind::human) return *costs[h.id];
  throw std::logic_error("no human arc for " + action);
}

RulaScoreTrace constant_trace(double g, double duration, std::size_t steps = 20) {
  RulaScoreTrace tr;
  for (std::size_t i = 0; i <= steps; ++i) {
    ScoreSample s;
    s.t = duration * double(i) / double(steps);
    s.score.fill(g);
    tr.samples.push_back(s);
  }
  return tr;
}

std::string worker_letters(const std::vector<Allocation>& allocation) {
  std::string out;
  for (const Allocation& a : allocation) out += a.kind == WorkerKind::human ? 'H' : 'R';
  return out;
}

}  // namespace

TEST(SessionStart, AcceptsFixtureAndZeroWear) {
  const Scenario sc = corner_joint_scenario();
  WearVector expected;
  expected.values = {0.3, 0.1, 0.1, 0.45, 0.5};
  EXPECT_EQ(sc.initial_wear.values, expected.values);
  EXPECT_NO_THROW(Session::start(sc.graph, sc.models, sc.config, sc.initial_wear));
  EXPECT_NO_THROW(Session::start(sc.graph, sc.models, sc.config, uniform(0.0)));
}

TEST(SessionStart, Rejections) {
  const Scenario sc = corner_joint_scenario();
  EXPECT_THROW(Session::start(sc.graph, sc.models, sc.config, uniform(1.0)), Error);
  auto missing = sc.models;
  missing.erase("a3");
  try {
    Session::start(sc.graph, missing, sc.config, uniform(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("a3"), std::string::npos);
  }
  // Two robots and no human.
  const Aog robots = build_graph({"x", "y"}, [](PieceSet, PieceSet, PieceSet) { return true; },
                                 {{"r1", WorkerKind::robot}, {"r2", WorkerKind::robot}});
  EXPECT_THROW(Session::start(robots, models_for(robots, 0.9), sc.config, uniform(0.0)), Error);
}

TEST(Recost, FixtureFirstActionCosts32) {
  const Session s = fixture_session();
  EXPECT_EQ(human_arc_cost(s, "a1"), 32.0);
  const Aog& g = s.graph();
  const ArcCosts costs = s.recost();
  for (const HyperArc& h : g.arcs())
    if (g.worker(h.worker).kind == WorkerKind::robot) EXPECT_EQ(*costs[h.id], 35.0);
}

TEST(Recost, IdentityModelsLowWearCostFive) {
  const Aog g = corner_joint_graph();
  const Session s = Session::start(g, models_for(g, 1.0), {}, uniform(0.1));
  for (const std::string& a : g.actions()) EXPECT_EQ(human_arc_cost(s, a), 5.0);
}

TEST(Recost, AnyHighJointCostsAtLeast104) {
  const Aog g = corner_joint_graph();
  WearVector w = uniform(0.0);
  w[Joint::wrist] = 0.8;
  const Session s = Session::start(g, models_for(g, 1.0), {}, w);
  for (const std::string& a : g.actions()) EXPECT_GE(human_arc_cost(s, a), 104.0);
}

TEST(Suggest, FixtureFirstTwoSteps) {
  Session s = fixture_session();
  const Suggestion first = s.suggest_next();
  EXPECT_EQ(first.action, "a1");
  EXPECT_EQ(first.worker, "human");
  EXPECT_EQ(first.cost, 32.0);
  s.complete_action(first.action, first.worker);
  const Suggestion second = s.suggest_next();
  EXPECT_EQ(second.action, "a2");
  EXPECT_EQ(second.worker, "robot");
}

TEST(Suggest, LastActionGoesToRobotWhenHumanIsDearer) {
  const Aog g = generate_linear_assembly(2, 2);
  SessionConfig cfg;
  cfg.cost.robot_cost = 35.0;
  Session s = Session::start(g, models_for(g, 1.0), cfg, uniform(0.8));
  EXPECT_EQ(s.suggest_next().worker, "robot1");
  s.complete_action(g.action(0), "robot1");
  EXPECT_TRUE(s.complete());
  EXPECT_THROW(s.suggest_next(), Error);
}

TEST(Complete, RobotActionDischargesWear) {
  Session s = fixture_session();
  s.complete_action("a1", "human");
  const WearVector before = s.wear();
  s.complete_action("a2", "robot");
  const double d = s.config().robot_duration("a2");
  const double factor = std::exp(-s.config().cost.recovery_rate * d / s.config().cost.capacity());
  for (std::size_t j = 0; j < kJointCount; ++j) {
    EXPECT_NEAR(s.wear().values[j], before.values[j] * factor, 1e-15);
    EXPECT_LT(s.wear().values[j], before.values[j]);
  }
}

TEST(Complete, HumanTraceRaisesWear) {
  Session s = fixture_session();
  CompletionEvidence ev;
  ev.scores = constant_trace(2.0, 12.0);
  const WearVector before = s.wear();
  s.complete_action("a1", "human", ev);
  for (std::size_t j = 0; j < kJointCount; ++j) EXPECT_GT(s.wear().values[j], before.values[j]);
  EXPECT_DOUBLE_EQ(s.clock(), 12.0);
  EXPECT_EQ(s.events()[s.events().size() - 2].payload["source"], "trace");
}

TEST(Complete, ModelAndTraceAgreeForCalibratedConstantScore) {
  const Aog g = corner_joint_graph();
  const double cap = CostConfig{}.capacity();
  const double gscore = 3.5, d = 14.0;
  auto models = models_for(g, std::exp(-gscore * d / cap), d);
  Session by_model = Session::start(g, models, {}, uniform(0.2));
  Session by_trace = Session::start(g, models, {}, uniform(0.2));
  by_model.complete_action("a1", "human");
  CompletionEvidence ev;
  ev.scores = constant_trace(gscore, d);
  by_trace.complete_action("a1", "human", ev);
  for (std::size_t j = 0; j < kJointCount; ++j)
    EXPECT_NEAR(by_model.wear().values[j], by_trace.wear().values[j], 1e-12);
  EXPECT_DOUBLE_EQ(by_model.clock(), by_trace.clock());
}

TEST(Complete, Rejections) {
  Session s = fixture_session();
  EXPECT_THROW(s.complete_action("a2", "human"), Error);
  EXPECT_THROW(s.complete_action("zz", "human"), Error);
  CompletionEvidence neg;
  neg.duration_s = -1.0;
  EXPECT_THROW(s.complete_action("a1", "robot", neg), Error);
  s.complete_action("a1", "human");
  try {
    s.complete_action("a1", "human");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_enabled);
  }
}

TEST(Override, SwitchesWorkerAndIsLogged) {
  Session s = fixture_session();
  s.suggest_next();
  s.override_suggestion("a1", "robot");
  ASSERT_TRUE(s.current_suggestion());
  EXPECT_TRUE(s.current_suggestion()->overridden);
  EXPECT_EQ(s.events().back().kind, "override");
  EXPECT_EQ(s.events().back().payload["replaced"]["worker"], "human");
  const WearVector before = s.wear();
  s.complete_action("a1", "robot");
  EXPECT_LT(s.wear().values[0], before.values[0]);
  EXPECT_THROW(s.override_suggestion("a5", "human"), Error);
}

TEST(Override, DifferentEnabledAction) {
  Session s = fixture_session();
  s.complete_action("a1", "human");
  EXPECT_EQ(s.suggest_next().action, "a2");
  s.override_suggestion("a4", "human");
  EXPECT_EQ(s.current_suggestion()->action, "a4");
}

TEST(Offline, FixtureAllHuman) {
  const Session s = fixture_session();
  EXPECT_EQ(worker_letters(s.offline_allocation()), "HHHHH");
}

TEST(Offline, FreeRobotTakesEverything) {
  Scenario sc = corner_joint_scenario();
  sc.config.cost.robot_cost = 0.0;
  const Session s = Session::start(sc.graph, sc.models, sc.config, sc.initial_wear);
  EXPECT_EQ(worker_letters(s.offline_allocation()), "RRRRR");
}

TEST(Offline, NoFixedAssignmentIsCheaper) {
  // Brute force over the 2^5 worker assignments of each action order in the plan.
  const Session s = fixture_session();
  const PlanTree plan = s.offline_plan();
  const ArcCosts costs = s.costs_for(s.initial_wear());
  const Aog& g = s.graph();
  for (unsigned mask = 0; mask < 32; ++mask) {
    ProgressState st = initial_state(g);
    double total = 0.0;
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
      const WorkerIndex w = (mask >> k) & 1u;
      const auto arc = find_enabled_arc(g, st, plan.steps[k].action, w);
      ASSERT_TRUE(arc);
      total += *costs[*arc];
      st = apply_arc(st, g, *arc);
    }
    EXPECT_LE(plan.total_cost, total);
  }
}

TEST(Replay, FixtureOnlineRowAndLogShape) {
  const ScenarioRun run = run_scenario(corner_joint_scenario());
  EXPECT_EQ(worker_letters(run.online), "HRHHR");
  EXPECT_EQ(worker_letters(run.offline), "HHHHH");
  std::size_t completions = 0;
  for (const Event& e : run.session.events()) completions += e.kind == "completion";
  EXPECT_EQ(completions, 5u);
  EXPECT_EQ(run.session.events().back().kind, "assembly_complete");
  for (std::size_t i = 0; i < run.session.events().size(); ++i) EXPECT_EQ(run.session.events()[i].seq, i);
}

TEST(Replay, RoundTripKeepsDigest) {
  const ScenarioRun run = run_scenario(corner_joint_scenario());
  const std::string log = run.session.export_log();
  const Session back = Session::replay(log);
  EXPECT_EQ(back.digest(), run.session.digest());
  EXPECT_EQ(back.export_log(), log);
  EXPECT_EQ(back.state_json(), run.session.state_json());
}

TEST(Replay, EmptySessionLogIsStartOnly) {
  const Session s = fixture_session();
  const std::string log = s.export_log();
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1);
  EXPECT_EQ(json::parse(log.substr(0, log.find('\n')))["kind"], "session_start");
  EXPECT_EQ(Session::replay(log).digest(), s.digest());
}

TEST(Replay, TamperedLogIsRejected) {
  const ScenarioRun run = run_scenario(corner_joint_scenario());
  std::string log = run.session.export_log();
  const auto pos = log.find("\"worker\":\"robot\"");
  ASSERT_NE(pos, std::string::npos);
  log.replace(pos, 16, "\"worker\":\"human\"");
  EXPECT_THROW(Session::replay(log), Error);
  EXPECT_THROW(Session::replay(std::string("{\"v\":1}\n")), Error);
  EXPECT_THROW(Session::replay(std::string("not json\n")), Error);
}

TEST(Snapshot, RoundTripAndDigestCheck) {
  Session s = fixture_session();
  s.suggest_next();
  s.complete_action("a1", "human");
  const json snap = s.snapshot();
  EXPECT_EQ(snap["v"], kSnapshotVersion);
  const Session back = Session::from_snapshot(snap);
  EXPECT_EQ(back.digest(), s.digest());
  json bad = snap;
  bad["digest"] = "0000000000000000";
  EXPECT_THROW(Session::from_snapshot(bad), Error);
}

TEST(State, ReadsAreSideEffectFree) {
  Session s = fixture_session();
  s.suggest_next();
  const auto n = s.events().size();
  const json a = s.state_json();
  const json b = s.state_json();
  EXPECT_EQ(a, b);
  EXPECT_EQ(s.events().size(), n);
  EXPECT_EQ(a["wear"]["trunk"], 0.45);
}

TEST(Config, JsonRoundTrip) {
  SessionConfig c;
  c.robot_durations = {{"a1", 20.0}};
  c.default_robot_duration_s = 12.0;
  c.strong_arm = "left";
  const SessionConfig back = session_config_from_json(session_config_to_json(c));
  EXPECT_EQ(session_config_to_json(back), session_config_to_json(c));
  EXPECT_EQ(back.robot_duration("a1"), 20.0);
  EXPECT_EQ(back.robot_duration("a9"), 12.0);
  EXPECT_THROW(session_config_from_json(json::parse(R"({"clock":"sundial"})")), Error);
}
