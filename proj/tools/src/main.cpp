// aogalloc: command line entry points.
//
// Exit status: 0 ok, 1 validation failure, 2 usage error, 3 I/O error.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "aogalloc/aog.hpp"
#include "aogalloc/aog_io.hpp"
#include "aogalloc/bench.hpp"
#include "aogalloc/calibration.hpp"
#include "aogalloc/error.hpp"
#include "aogalloc/planner.hpp"
#include "aogalloc/scenarios.hpp"
#include "aogalloc/service.hpp"
#include "aogalloc/session.hpp"

using namespace aogalloc;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 1, kUsage = 2, kIo = 3 };

// Flags mirroring SessionConfig fields. Applied on top of --config.
struct ConfigFlags {
  std::string config_file;
  std::optional<double> gamma_low, gamma_med, gamma_high;
  std::optional<double> v_th1, v_th2, robot_cost, recovery_rate;
  std::optional<double> g_avg, endurance_s, v_target, capacity;
  std::optional<double> default_robot_duration_s, sigmoid_steepness;
  std::optional<std::string> clock, strong_arm;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "Session config JSON; the flags below override it")->check(CLI::ExistingFile);
    app->add_option("--gamma-low", gamma_low, "Score of the low risk band");
    app->add_option("--gamma-med", gamma_med, "Score of the medium risk band");
    app->add_option("--gamma-high", gamma_high, "Score of the high risk band");
    app->add_option("--v-th1", v_th1, "Upper wear bound of the low band");
    app->add_option("--v-th2", v_th2, "Lower wear bound of the high band");
    app->add_option("--robot-cost", robot_cost, "Cost of every robot hyper-arc");
    app->add_option("--recovery-rate", recovery_rate, "Recovery rate r");
    app->add_option("--g-avg", g_avg, "Average RULA score used for the capacity");
    app->add_option("--endurance-s", endurance_s, "Endurance time in seconds");
    app->add_option("--v-target", v_target, "Wear reached at the endurance time");
    app->add_option("--capacity", capacity, "Capacity C; overrides g-avg/endurance/v-target");
    app->add_option("--default-robot-duration-s", default_robot_duration_s, "Robot duration for unlisted actions");
    app->add_option("--sigmoid-steepness", sigmoid_steepness, "Logistic steepness per degree");
    app->add_option("--clock", clock, "logical or wall")->check(CLI::IsMember({"logical", "wall"}));
    app->add_option("--strong-arm", strong_arm, "right or left")->check(CLI::IsMember({"right", "left"}));
  }

  SessionConfig apply(SessionConfig base) const {
    if (!config_file.empty()) {
      try {
        base = session_config_from_json(read_json_file(config_file), base);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::io) throw;
        throw Error(e.kind(), config_file + ": " + e.what());
      }
    }
    json o = json::object();
    if (gamma_low || gamma_med || gamma_high)
      o["gamma"] = {{"low", gamma_low.value_or(base.cost.gamma_low)},
                    {"med", gamma_med.value_or(base.cost.gamma_med)},
                    {"high", gamma_high.value_or(base.cost.gamma_high)}};
    auto put = [&](const char* key, const auto& v) {
      if (v) o[key] = *v;
    };
    put("v_th1", v_th1);
    put("v_th2", v_th2);
    put("robot_cost", robot_cost);
    put("recovery_rate", recovery_rate);
    put("g_avg", g_avg);
    put("endurance_s", endurance_s);
    put("v_target", v_target);
    put("capacity", capacity);
    put("default_robot_duration_s", default_robot_duration_s);
    put("sigmoid_steepness", sigmoid_steepness);
    put("clock", clock);
    put("strong_arm", strong_arm);
    return session_config_from_json(o, base);
  }
};

IntRange parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    std::size_t used = 0;
    if (colon == std::string::npos) {
      const auto v = std::stoul(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const auto a = std::stoul(text.substr(0, colon));
    const auto b = std::stoul(text.substr(colon + 1));
    return {a, b};
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_argument, "expected N or A:B, got '" + text + "'");
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!std::cout) throw Error(ErrorKind::io, "failed to write to stdout");
  } else {
    write_text_file(path, text);
  }
}

const char* kind_label(WorkerKind k) { return k == WorkerKind::human ? "H" : "R"; }

json allocation_json(const std::vector<Allocation>& allocation) {
  json out = json::array();
  for (const Allocation& a : allocation)
    out.push_back({{"action", a.action}, {"worker", a.worker}, {"kind", to_string(a.kind)}, {"cost", a.cost}});
  return out;
}

json plan_with_allocation(const Aog& graph, const PlanTree& plan) {
  json out = plan_to_json(graph, plan);
  json allocation = json::array();
  for (const PlanStep& s : plan.steps)
    allocation.push_back({{"action", graph.action(s.action)},
                          {"worker", graph.worker(s.worker).id},
                          {"kind", to_string(graph.worker(s.worker).kind)}});
  out["allocation"] = std::move(allocation);
  return out;
}

std::string format_suggestions(const ScenarioRun& run) {
  std::ostringstream out;
  out << std::left << std::setw(6) << "step" << std::setw(20) << "suggested" << std::setw(10) << "cost"
      << "executed\n";
  for (std::size_t i = 0; i < run.online.size(); ++i) {
    std::string suggested = "-";
    std::string cost = "-";
    if (i < run.suggestions.size()) {
      suggested = run.suggestions[i].action + " -> " + run.suggestions[i].worker;
      std::ostringstream c;
      c << run.suggestions[i].cost;
      cost = c.str();
    }
    const Allocation& a = run.online[i];
    out << std::setw(6) << i + 1 << std::setw(20) << suggested << std::setw(10) << cost << a.action << " -> "
        << a.worker << " (" << kind_label(a.kind) << ")\n";
  }
  return out.str();
}

// Detects the document type of a JSON file from its keys.
std::string detect_kind(const json& doc) {
  if (doc.contains("events") && doc.contains("digest")) return "snapshot";
  if (doc.contains("initial_wear")) return "scenario";
  if (doc.contains("arcs") && doc.contains("nodes")) return "graph";
  if (doc.contains("trials")) return "trials";
  if (doc.contains("actions") && doc["actions"].is_object()) return "calibration";
  return "config";
}

// An event log is JSON lines whose first record carries seq and kind.
bool looks_like_log(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  const json first = json::parse(line, nullptr, false);
  return first.is_object() && first.contains("seq") && first.contains("kind");
}

int run_validate(const std::string& path, std::string kind) {
  if (kind == "auto" && looks_like_log(path)) kind = "log";
  if (kind == "log") {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
    const Session s = Session::replay(in);
    std::cout << "ok: event log with " << s.events().size() << " events replays exactly\n";
    return kOk;
  }
  const json doc = read_json_file(path);
  if (kind == "auto") kind = detect_kind(doc);
  if (kind == "graph") {
    const Aog graph = load_graph(path);
    const ValidationReport report = validate(graph);
    for (const Violation& v : report.violations)
      std::cout << path << ": " << v.subject << ": " << v.message << " [" << v.rule << "]\n";
    if (!report.ok()) return kValidation;
    std::cout << "ok: graph with " << graph.nodes().size() << " nodes, " << graph.arcs().size() << " hyper-arcs\n";
  } else if (kind == "scenario") {
    const Scenario s = load_scenario(path);
    Session::start(s.graph, s.models, s.config, s.initial_wear);
    std::cout << "ok: scenario '" << s.name << "'\n";
  } else if (kind == "snapshot") {
    const Session s = Session::from_snapshot(doc);
    std::cout << "ok: snapshot with " << s.events().size() << " events, digest " << s.digest() << "\n";
  } else if (kind == "calibration") {
    const auto cal = calibration_from_json(doc);
    std::cout << "ok: calibration for " << cal.size() << " actions\n";
  } else if (kind == "trials") {
    const auto trials = trials_from_json(doc, std::filesystem::path(path).parent_path(), RulaBandTable::standard());
    std::cout << "ok: " << trials.size() << " trials\n";
  } else {
    session_config_from_json(doc);
    std::cout << "ok: config\n";
  }
  return kOk;
}

std::string markdown_reference(const CLI::App& app) {
  std::ostringstream out;
  out << "# aogalloc command reference\n\n";
  out << "Generated by `aogalloc reference`.\n\n";
  out << "Exit status: 0 ok, 1 validation failure, 2 usage error, 3 I/O error.\n\n";
  for (const CLI::App* sub : app.get_subcommands({})) {
    out << "## " << sub->get_name() << "\n\n" << sub->get_description() << "\n\n";
    out << "| option | description | default |\n|---|---|---|\n";
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->get_name() == "--help") continue;
      std::string name = opt->get_name(false, true);
      out << "| `" << name << "` | " << opt->get_description() << " | " << opt->get_default_str() << " |\n";
    }
    out << "\n";
  }
  out << "## File formats\n\n"
         "- Graph JSON: `{v, pieces, workers, actions, nodes, arcs}`; see `aog_io.hpp`.\n"
         "- Calibration JSON: `{v, actions:{id:{joint:{alpha, stddev, n_trials}, duration_s}}}`; see `calibration.hpp`.\n"
         "- Trials JSON: `{v, trials:[{action, duration_s, angles | angles_file | scores | v_start + v_end}]}`.\n"
         "- Scenario JSON: `{v, name, graph | graph_file, calibration | calibration_file, config, initial_wear, steps?}`; "
         "see `scenarios.hpp`.\n"
         "- Event log: one `{v, seq, t, kind, payload}` object per line; see `session.hpp`.\n"
         "- Timing table CSV: `pieces,workers,nodes,arcs,t_median_us,t_p10_us,t_p90_us`; see `bench.hpp`.\n"
         "- Wire protocol: `docs/protocol.md`.\n";
  return out.str();
}

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ergonomics-aware human-robot task allocation on AND/OR graphs"};
  app.require_subcommand(1);

  // generate
  std::size_t gen_pieces = 0, gen_workers = 2;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_builtin, gen_out;
  auto* generate = app.add_subcommand("generate", "Write an AND/OR graph as JSON");
  generate->add_option("--pieces", gen_pieces, "Pieces of a linear assembly")->check(CLI::Range(1, 64));
  generate->add_option("--workers", gen_workers, "Workers (the first is the human)")->capture_default_str()->check(CLI::Range(1, 64));
  generate->add_option("--builtin", gen_builtin, "Built-in task instead of a linear assembly")
      ->check(CLI::IsMember({"corner-joint"}));
  generate->add_option("--cost-seed", gen_seed, "Assign random integer costs in [1, 100] from this seed");
  generate->add_option("-o,--out", gen_out, "Output file (default stdout)");

  // validate
  std::string val_file, val_kind = "auto";
  auto* validate_cmd = app.add_subcommand("validate", "Check a graph, scenario, calibration, trials, config, event log or snapshot");
  validate_cmd->add_option("file", val_file, "File to check")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--kind", val_kind, "Document type")->capture_default_str()
      ->check(CLI::IsMember({"auto", "graph", "scenario", "calibration", "trials", "config", "log", "snapshot"}));

  // calibrate
  std::string cal_trials, cal_out, cal_average = "mean";
  ConfigFlags cal_flags;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate per-action alpha from trial traces");
  calibrate->add_option("--trials", cal_trials, "Trials JSON")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--average", cal_average, "How trials are combined")->capture_default_str()
      ->check(CLI::IsMember({"mean", "median", "trimmed"}));
  calibrate->add_option("-o,--out", cal_out, "Output calibration file (default stdout)");
  cal_flags.add_to(calibrate);

  // plan
  std::string plan_graph, plan_scenario, plan_out;
  ConfigFlags plan_flags;
  auto* plan = app.add_subcommand("plan", "Offline plan: costs from the graph, or from a scenario's initial wear");
  auto* plan_graph_opt = plan->add_option("--graph", plan_graph, "Fully costed graph JSON")->check(CLI::ExistingFile);
  plan->add_option("--scenario", plan_scenario, "Scenario JSON")->check(CLI::ExistingFile)->excludes(plan_graph_opt);
  plan->add_option("-o,--out", plan_out, "Output file (default stdout)");
  plan_flags.add_to(plan);

  // replay
  std::string rep_scenario, rep_log, rep_export, rep_snapshot;
  bool rep_builtin = false, rep_json = false;
  ConfigFlags rep_flags;
  auto* replay = app.add_subcommand("replay", "Drive a session from a scenario or event log and print the allocation");
  auto* rep_scn_opt = replay->add_option("--scenario", rep_scenario, "Scenario JSON")->check(CLI::ExistingFile);
  auto* rep_log_opt =
      replay->add_option("--log", rep_log, "Event log (JSON lines)")->check(CLI::ExistingFile)->excludes(rep_scn_opt);
  replay->add_flag("--corner-joint", rep_builtin, "Use the built-in corner-joint fixture")
      ->excludes(rep_scn_opt)
      ->excludes(rep_log_opt);
  replay->add_option("--export-log", rep_export, "Write the session's event log here");
  replay->add_option("--snapshot", rep_snapshot, "Write a session snapshot file here");
  replay->add_flag("--json", rep_json, "Print the final session state as JSON");
  rep_flags.add_to(replay);

  // bench
  std::string bench_pieces = "2:15", bench_workers = "2", bench_format = "csv", bench_out;
  BenchOptions bench_opts;
  bool bench_shrinking = false;
  auto* bench = app.add_subcommand("bench", "Time the planner on linear assemblies");
  bench->add_option("--pieces", bench_pieces, "Piece count or range A:B")->capture_default_str();
  bench->add_option("--workers", bench_workers, "Worker count or range A:B")->capture_default_str();
  bench->add_option("--reps", bench_opts.repetitions, "Repetitions per configuration (>= 3)")->capture_default_str();
  bench->add_option("--seed", bench_opts.seed, "Cost seed")->capture_default_str();
  bench->add_option("--min-batch-us", bench_opts.min_batch_us, "Minimum timed batch per repetition")->capture_default_str();
  bench->add_flag("--shrinking", bench_shrinking, "Time replanning after each completion (single size)");
  bench->add_option("--format", bench_format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  bench->add_option("-o,--out", bench_out, "Output file (default stdout)");

  // serve
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the session protocol over HTTP");
  serve->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve->add_option("--port", serve_port, "Port (0 picks a free one)")->capture_default_str()->check(CLI::Range(0, 65535));

  // reference
  std::string ref_out;
  auto* reference = app.add_subcommand("reference", "Write this command reference as Markdown");
  reference->add_option("-o,--out", ref_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) {
      Aog graph;
      if (!gen_builtin.empty()) {
        graph = corner_joint_graph();
      } else if (gen_pieces > 0) {
        graph = generate_linear_assembly(gen_pieces, gen_workers);
      } else {
        std::cerr << "generate: give --pieces or --builtin\n";
        return kUsage;
      }
      if (gen_seed) {
        std::mt19937_64 rng(*gen_seed);
        std::uniform_int_distribution<int> dist(1, 100);
        ArcCosts costs(graph.arcs().size());
        for (auto& c : costs) c = double(dist(rng));
        graph = graph.with_costs(costs);
      }
      write_output(gen_out, graph_to_json(graph).dump(2) + "\n");
      std::cerr << graph.nodes().size() << " nodes, " << graph.arcs().size() << " hyper-arcs\n";
    } else if (*validate_cmd) {
      return run_validate(val_file, val_kind);
    } else if (*calibrate) {
      const SessionConfig config = cal_flags.apply({});
      const auto trials =
          trials_from_json(read_json_file(cal_trials), std::filesystem::path(cal_trials).parent_path(), config.bands);
      const AlphaAverage how = cal_average == "median"    ? AlphaAverage::median
                               : cal_average == "trimmed" ? AlphaAverage::trimmed_mean
                                                          : AlphaAverage::mean;
      const auto cal = estimate_action_models(trials, config.cost.capacity(), how);
      write_output(cal_out, calibration_to_json(cal).dump(2) + "\n");
    } else if (*plan) {
      json out;
      if (!plan_scenario.empty()) {
        Scenario s = load_scenario(plan_scenario);
        s.config = plan_flags.apply(s.config);
        const Session session = Session::start(s.graph, s.models, s.config, s.initial_wear);
        out = plan_with_allocation(session.graph(), session.offline_plan());
      } else if (!plan_graph.empty()) {
        const Aog graph = load_graph(plan_graph);
        const ValidationReport report = validate(graph);
        for (const Violation& v : report.violations)
          std::cerr << plan_graph << ": " << v.subject << ": " << v.message << " [" << v.rule << "]\n";
        if (!report.ok()) return kValidation;
        out = plan_with_allocation(graph, optimal_plan(graph, initial_state(graph)));
      } else {
        std::cerr << "plan: give --graph or --scenario\n";
        return kUsage;
      }
      write_output(plan_out, out.dump(2) + "\n");
    } else if (*replay) {
      std::optional<ScenarioRun> run;
      if (!rep_log.empty()) {
        std::ifstream in(rep_log);
        if (!in) throw Error(ErrorKind::io, "cannot open '" + rep_log + "'");
        Session s = Session::replay(in);
        std::vector<Suggestion> suggestions;
        for (const Event& e : s.events())
          if (e.kind == "suggestion")
            suggestions.push_back({e.payload["action"], e.payload["worker"], e.payload["arc"], e.payload["cost"],
                                   e.payload["plan_cost"], false});
        auto online = s.online_allocation();
        auto offline = s.offline_allocation();
        run.emplace(ScenarioRun{std::move(s), std::move(online), std::move(offline), std::move(suggestions)});
      } else if (!rep_scenario.empty() || rep_builtin) {
        Scenario scenario = rep_builtin ? corner_joint_scenario() : load_scenario(rep_scenario);
        scenario.config = rep_flags.apply(scenario.config);
        run.emplace(run_scenario(scenario));
      } else {
        std::cerr << "replay: give --scenario, --log or --corner-joint\n";
        return kUsage;
      }
      if (!rep_export.empty()) write_text_file(rep_export, run->session.export_log());
      if (!rep_snapshot.empty()) write_text_file(rep_snapshot, run->session.snapshot().dump(2) + "\n");
      if (rep_json) {
        json out = run->session.state_json();
        out["online"] = allocation_json(run->online);
        out["offline"] = allocation_json(run->offline);
        std::cout << out.dump(2) << "\n";
      } else {
        std::cout << format_suggestions(*run) << "\n" << format_allocation_table(*run);
        std::cout << "digest " << run->session.digest() << "\n";
      }
    } else if (*bench) {
      const TableFormat format = bench_format == "json" ? TableFormat::json : TableFormat::csv;
      const IntRange pieces = parse_range(bench_pieces);
      const IntRange workers = parse_range(bench_workers);
      std::ostringstream out;
      if (bench_shrinking) {
        if (pieces.size() != 1 || workers.size() != 1) {
          std::cerr << "bench --shrinking takes a single piece count and worker count\n";
          return kUsage;
        }
        emit_table(run_shrinking(pieces.first, workers.first, bench_opts), format, out);
      } else {
        emit_table(run_scaling(pieces, workers, bench_opts), format, out);
      }
      write_output(bench_out, out.str());
    } else if (*serve) {
      Service service;
      const int port = service.bind(serve_host, serve_port);
      if (port < 0) throw Error(ErrorKind::io, "cannot bind " + serve_host + ":" + std::to_string(serve_port));
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << serve_host << ":" << port << "\n";
      service.listen_after_bind();
      g_service = nullptr;
    } else if (*reference) {
      write_output(ref_out, markdown_reference(app));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::io: return kIo;
      case ErrorKind::invalid_argument: return kUsage;
      default: return kValidation;
    }
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
