// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aogalloc/aog.hpp"
#include "aogalloc/bench.hpp"
#include "aogalloc/ergo.hpp"
#include "aogalloc/planner.hpp"
#include "aogalloc/scenarios.hpp"
#include "aogalloc/session.hpp"
#include "oracles.hpp"

using namespace aogalloc;

namespace {

int failures = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void criterion(const std::string& name, const std::function<void(bool&, std::ostringstream&)>& body) {
  bool ok = true;
  std::ostringstream detail;
  try {
    body(ok, detail);
  } catch (const std::exception& e) {
    ok = false;
    detail << "exception: " << e.what();
  }
  report(name, ok, detail.str());
}

RulaScoreTrace constant_trace(double g, double duration, std::size_t steps) {
  RulaScoreTrace tr;
  for (std::size_t i = 0; i <= steps; ++i) {
    ScoreSample s;
    s.t = duration * double(i) / double(steps);
    s.score.fill(g);
    tr.samples.push_back(s);
  }
  return tr;
}

WearVector uniform(double v) {
  WearVector w;
  w.values.fill(v);
  return w;
}

std::string letters(const std::vector<Allocation>& allocation) {
  std::string out;
  for (const Allocation& a : allocation) out += a.kind == WorkerKind::human ? 'H' : 'R';
  return out;
}

// A randomized session: random task, models, wear, evidence and overrides.
Session random_session(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const bool corner = rng() % 3 == 0;
  Scenario sc;
  if (corner) {
    sc = corner_joint_scenario();
  } else {
    sc.graph = generate_linear_assembly(2 + rng() % 6, 2 + rng() % 2);
    for (const std::string& a : sc.graph.actions()) {
      ActionModel m;
      m.action = a;
      for (double& x : m.alpha) x = 0.5 + 0.5 * u(rng);
      m.nominal_duration_s = 5.0 + 30.0 * u(rng);
      sc.models.emplace(a, m);
    }
    sc.config.default_robot_duration_s = 10.0 + 50.0 * u(rng);
    sc.config.cost.robot_cost = 5.0 + 60.0 * u(rng);
  }
  for (double& v : sc.initial_wear.values) v = 0.9 * u(rng);

  Session s = Session::start(sc.graph, sc.models, sc.config, sc.initial_wear);
  while (!s.complete()) {
    const Suggestion sug = s.suggest_next();
    std::string action = sug.action, worker = sug.worker;
    if (rng() % 4 == 0) {
      // Override to a random enabled (action, worker).
      const auto enabled = enabled_arcs(s.graph(), s.progress());
      const HyperArc& h = s.graph().arc(enabled[rng() % enabled.size()]);
      action = s.graph().action(h.action);
      worker = s.graph().worker(h.worker).id;
      s.override_suggestion(action, worker);
    }
    CompletionEvidence ev;
    const bool human = s.graph().worker(s.graph().worker_index(worker)).kind == WorkerKind::human;
    switch (rng() % 3) {
      case 0:
        break;
      case 1:
        ev.duration_s = 1.0 + 40.0 * u(rng);
        break;
      case 2:
        if (human) {
          AngleTrace tr;
          const std::size_t n = 2 + rng() % 20;
          for (std::size_t i = 0; i < n; ++i) {
            AngleSample a;
            a.t = 0.25 * double(i);
            a.degrees = {120 * u(rng), 40 + 80 * u(rng), 60 * u(rng) - 30, 60 * u(rng), 40 * u(rng)};
            tr.samples.push_back(a);
          }
          ev.angles = tr;
        }
        break;
    }
    s.complete_action(action, worker, ev);
  }
  return s;
}

}  // namespace

int main() {
  criterion("graph-counts", [](bool& ok, std::ostringstream& d) {
    const auto t0 = Clock::now();
    const Aog g = generate_linear_assembly(15, 2);
    const double t = seconds_since(t0);
    ok = g.nodes().size() == 120 && g.arcs().size() == 1120 && t < 1.0;
    d << g.nodes().size() << " nodes, " << g.arcs().size() << " hyper-arcs in " << t << " s (want 120, 1120, < 1 s)";
  });

  criterion("capacity-and-charge", [](bool& ok, std::ostringstream& d) {
    const double c = capacity(3, 240, 0.993);
    const double v = integrate_wear(uniform(0.0), constant_trace(3.0, 240.0, 240 * 60), c).back().values[0];
    ok = std::abs(c - 145.11) <= 0.01 && std::abs(v - 0.993) <= 0.001;
    d.precision(6);
    d << "C = " << c << " (145.11 +- 0.01), V(240 s) = " << v << " (0.993 +- 0.001)";
  });

  criterion("recovery", [](bool& ok, std::ostringstream& d) {
    const double c = capacity(3, 240, 0.993);
    double worst = 0.0;
    for (double v0 : {0.1, 0.3, 0.5, 0.7, 0.9, 0.999})
      worst = std::max(worst, std::abs(recover(v0, 240.0, 3.0, c) - 0.007 * v0));
    ok = worst <= 1e-4;
    d << "max |V - 0.007 V0| = " << worst << " (<= 1e-4)";
  });

  criterion("cost-reproduction", [](bool& ok, std::ostringstream& d) {
    const Scenario sc = corner_joint_scenario();
    const Session s = Session::start(sc.graph, sc.models, sc.config, sc.initial_wear);
    const WearVector predicted = predict(sc.initial_wear, sc.models.at("a1"));
    const double ch = human_cost(predicted, sc.config.cost);
    const PlanStep first = next_action(s.current_plan(), s.progress());
    const bool human = s.graph().worker(first.worker).kind == WorkerKind::human;
    ok = ch == 32.0 && human && s.graph().action(first.action) == "a1" && sc.config.cost.robot_cost == 35.0;
    d << "c_H(a1) = " << ch << ", first step " << s.graph().action(first.action) << "/"
      << s.graph().worker(first.worker).id << " against c_R = " << sc.config.cost.robot_cost;
  });

  criterion("corner-joint-replay", [](bool& ok, std::ostringstream& d) {
    const auto t0 = Clock::now();
    const ScenarioRun run = run_scenario(corner_joint_scenario());
    const double t = seconds_since(t0);
    const std::string online = letters(run.online), offline = letters(run.offline);
    ok = online == "HRHHR" && offline == "HHHHH" && t < 1.0;
    d << "online " << online << " (HRHHR), offline " << offline << " (HHHHH) in " << t << " s";
  });

  criterion("planner-optimality", [](bool& ok, std::ostringstream& d) {
    const auto t0 = Clock::now();
    std::size_t cases = 0, mismatches = 0;
    for (std::size_t n = 1; n <= 6; ++n) {
      for (std::size_t w = 1; w <= 3; ++w) {
        const Aog g = generate_linear_assembly(n, w);
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
          std::mt19937_64 rng(seed);
          std::uniform_int_distribution<int> dist(1, 100);
          ArcCosts costs(g.arcs().size());
          for (auto& c : costs) c = double(dist(rng));
          const oracle::LinearTreeEnumerator brute(w, oracle::linear_graph_costs(g, costs));
          const double best = brute.minimum(0, n - 1);
          if (optimal_plan(g.with_costs(costs), initial_state(g)).total_cost != best) ++mismatches;
          ++cases;
        }
      }
    }
    const double t = seconds_since(t0);
    ok = mismatches == 0 && t < 60.0;
    d << cases << " cases, " << mismatches << " mismatches in " << t << " s (< 60 s)";
  });

  criterion("prediction-consistency", [](bool& ok, std::ostringstream& d) {
    const double c = capacity(3, 240, 0.993);
    double worst = 0.0;
    std::size_t points = 0;
    for (double v0 = 0.0; v0 < 0.99; v0 += 0.1) {
      for (double g = 1.0; g <= 7.0; g += 0.5) {
        for (double dur : {0.5, 5.0, 30.0, 120.0, 600.0}) {
          ActionModel m;
          m.action = "x";
          m.alpha.fill(std::exp(-g * dur / c));
          const double predicted = predict(uniform(v0), m).values[0];
          const double simulated = integrate_wear(uniform(v0), constant_trace(g, dur, 50), c).back().values[0];
          worst = std::max(worst, std::abs(predicted - simulated));
          ++points;
        }
      }
    }
    ok = worst <= 1e-9;
    d << points << " grid points, max |predict - simulate| = " << worst << " (<= 1e-9)";
  });

  criterion("scaling-properties", [](bool& ok, std::ostringstream& d) {
    BenchOptions opts;
    opts.repetitions = 15;
    opts.min_batch_us = 20000.0;
    const TimingTable pieces = run_scaling({2, 15}, {2, 2}, opts);
    std::vector<double> medians, x, y;
    for (const TimingRow& r : pieces.rows) {
      medians.push_back(r.t_median_us);
      if (r.pieces >= 6) {
        x.push_back(double(r.pieces));
        y.push_back(std::log(r.t_median_us));
      }
    }
    const double ordered = ordered_fraction(medians);
    const double r2 = linear_fit_r2(x, y);

    BenchOptions quick;
    quick.repetitions = 3;
    quick.min_batch_us = 0.0;
    const TimingTable workers = run_scaling({10, 10}, {2, 30}, quick);
    bool structural = workers.rows.size() == 29;
    for (const TimingRow& r : workers.rows) structural = structural && r.nodes == 55 && r.arcs == 165 * r.workers;

    ok = ordered >= 0.95 && r2 >= 0.9 && structural;
    d << "ordered pairs " << ordered << " (>= 0.95), R^2 of ln(median) over 6-15 = " << r2
      << " (>= 0.9), workers 2-30 at 10 pieces " << (structural ? "55 nodes, 165|W| arcs" : "structure mismatch");
  });

  criterion("session-determinism", [](bool& ok, std::ostringstream& d) {
    std::mt19937_64 rng(20240611);
    std::size_t equal = 0;
    const std::size_t total = 50;
    for (std::size_t i = 0; i < total; ++i) {
      const Session s = random_session(rng);
      const Session back = Session::replay(s.export_log());
      if (back.digest() == s.digest()) ++equal;
    }
    ok = equal == total;
    d << equal << "/" << total << " randomized sessions replay to the same digest";
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
