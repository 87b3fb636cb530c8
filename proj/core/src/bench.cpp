#include "aogalloc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "aogalloc/aog.hpp"
#include "aogalloc/error.hpp"
#include "aogalloc/planner.hpp"

namespace aogalloc {

namespace {

void check_sizes(IntRange pieces, IntRange workers, const BenchOptions& options) {
  if (pieces.size() == 0 || pieces.first < 1 || pieces.last > kBenchMaxPieces)
    throw Error(ErrorKind::invalid_argument, "pieces range must lie within [1, " + std::to_string(kBenchMaxPieces) + "]");
  if (workers.size() == 0 || workers.first < 1 || workers.last > kBenchMaxWorkers)
    throw Error(ErrorKind::invalid_argument,
                "workers range must lie within [1, " + std::to_string(kBenchMaxWorkers) + "]");
  if (options.repetitions < 3) throw Error(ErrorKind::invalid_argument, "repetitions must be at least 3");
}

ArcCosts random_costs(std::size_t n_arcs, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(1, 100);
  ArcCosts costs(n_arcs);
  for (auto& c : costs) c = double(dist(rng));
  return costs;
}

// Average microseconds per replan, batching calls until min_batch_us passes.
double time_replan(const Aog& graph, const ProgressState& state, const ArcCosts& costs, double min_batch_us) {
  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;
  std::size_t calls = 0;
  const auto start = clock::now();
  double elapsed = 0.0;
  do {
    sink = sink + replan(graph, state, costs).total_cost;
    ++calls;
    elapsed = std::chrono::duration<double, std::micro>(clock::now() - start).count();
  } while (elapsed < min_batch_us);
  return elapsed / double(calls);
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

std::size_t piece_count_of(const Aog& graph) { return graph.pieces().size(); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

TimingTable run_scaling(IntRange pieces, IntRange workers, const BenchOptions& options) {
  check_sizes(pieces, workers, options);
  struct Config {
    Aog graph;
    ProgressState state;
    std::mt19937_64 rng;
    std::vector<double> times;
  };
  std::vector<Config> configs;
  for (std::size_t p = pieces.first; p <= pieces.last; ++p) {
    for (std::size_t w = workers.first; w <= workers.last; ++w) {
      Aog graph = generate_linear_assembly(p, w);
      ProgressState state = initial_state(graph);
      // One cost stream per configuration, independent of the requested ranges.
      std::seed_seq seq{options.seed, std::uint64_t(p), std::uint64_t(w)};
      configs.push_back({std::move(graph), std::move(state), std::mt19937_64(seq), {}});
    }
  }
  // Repetitions outermost so slow drift in machine load spreads over every row.
  for (std::size_t r = 0; r < options.repetitions; ++r)
    for (Config& c : configs)
      c.times.push_back(time_replan(c.graph, c.state, random_costs(c.graph.arcs().size(), c.rng), options.min_batch_us));

  TimingTable table{options.seed, options.repetitions, {}};
  for (const Config& c : configs)
    table.rows.push_back({piece_count_of(c.graph), c.graph.workers().size(), c.graph.nodes().size(),
                          c.graph.arcs().size(), quantile(c.times, 0.5), quantile(c.times, 0.1), quantile(c.times, 0.9)});
  return table;
}

ShrinkTable run_shrinking(std::size_t pieces, std::size_t workers, const BenchOptions& options) {
  check_sizes({pieces, pieces}, {workers, workers}, options);
  ShrinkTable table{pieces, workers, options.seed, {}};
  const Aog graph = generate_linear_assembly(pieces, workers);
  const std::size_t steps = pieces - 1;
  std::vector<std::vector<double>> per_step(steps);
  std::mt19937_64 rng(options.seed);
  for (std::size_t r = 0; r < options.repetitions; ++r) {
    const ArcCosts costs = random_costs(graph.arcs().size(), rng);
    ProgressState state = initial_state(graph);
    for (std::size_t s = 0; s < steps; ++s) {
      per_step[s].push_back(time_replan(graph, state, costs, options.min_batch_us));
      const PlanTree plan = replan(graph, state, costs);
      state = apply_arc(state, graph, next_action(plan, state).arc);
    }
  }
  for (std::size_t s = 0; s < steps; ++s)
    table.rows.push_back({s + 1, steps - s, quantile(per_step[s], 0.5), quantile(per_step[s], 0.1),
                          quantile(per_step[s], 0.9)});
  return table;
}

nlohmann::json timing_table_to_json(const TimingTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TimingRow& r : table.rows)
    rows.push_back({{"pieces", r.pieces}, {"workers", r.workers}, {"nodes", r.nodes}, {"arcs", r.arcs},
                    {"t_median_us", r.t_median_us}, {"t_p10_us", r.t_p10_us}, {"t_p90_us", r.t_p90_us}});
  return {{"v", 1}, {"seed", table.seed}, {"repetitions", table.repetitions}, {"rows", rows}};
}

nlohmann::json shrink_table_to_json(const ShrinkTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ShrinkRow& r : table.rows)
    rows.push_back({{"step", r.step}, {"remaining", r.remaining}, {"t_median_us", r.t_median_us},
                    {"t_p10_us", r.t_p10_us}, {"t_p90_us", r.t_p90_us}});
  return {{"v", 1}, {"pieces", table.pieces}, {"workers", table.workers}, {"seed", table.seed}, {"rows", rows}};
}

void emit_table(const TimingTable& table, TableFormat format, std::ostream& out) {
  if (format == TableFormat::json) {
    out << timing_table_to_json(table).dump(2) << '\n';
  } else {
    out << "# seed=" << table.seed << " repetitions=" << table.repetitions << '\n';
    out << "pieces,workers,nodes,arcs,t_median_us,t_p10_us,t_p90_us\n";
    for (const TimingRow& r : table.rows)
      out << r.pieces << ',' << r.workers << ',' << r.nodes << ',' << r.arcs << ',' << num(r.t_median_us) << ','
          << num(r.t_p10_us) << ',' << num(r.t_p90_us) << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "failed to write timing table");
}

void emit_table(const ShrinkTable& table, TableFormat format, std::ostream& out) {
  if (format == TableFormat::json) {
    out << shrink_table_to_json(table).dump(2) << '\n';
  } else {
    out << "# seed=" << table.seed << " pieces=" << table.pieces << " workers=" << table.workers << '\n';
    out << "step,remaining,t_median_us,t_p10_us,t_p90_us\n";
    for (const ShrinkRow& r : table.rows)
      out << r.step << ',' << r.remaining << ',' << num(r.t_median_us) << ',' << num(r.t_p10_us) << ','
          << num(r.t_p90_us) << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "failed to write timing table");
}

double ordered_fraction(const std::vector<double>& series) {
  if (series.size() < 2) return 1.0;
  std::size_t ok = 0;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i] >= series[i - 1]) ++ok;
  return double(ok) / double(series.size() - 1);
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::invalid_argument, "fit needs >= 2 paired points");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return syy == 0.0 ? 1.0 : 0.0;
  return sxy * sxy / (sxx * syy);
}

}  // namespace aogalloc
