#pragma once

// Planner timing over the linear-assembly family.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aogalloc {

struct IntRange {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive

  std::size_t size() const noexcept { return last >= first ? last - first + 1 : 0; }
};

inline constexpr std::size_t kBenchMaxPieces = 20;
inline constexpr std::size_t kBenchMaxWorkers = 40;

struct BenchOptions {
  std::size_t repetitions = 5;  // >= 3
  std::uint64_t seed = 1;
  /// Each repetition repeats the search until at least this much time has
  /// passed and reports the per-search average.
  double min_batch_us = 2000.0;
};

struct TimingRow {
  std::size_t pieces = 0;
  std::size_t workers = 0;
  std::size_t nodes = 0;
  std::size_t arcs = 0;
  double t_median_us = 0.0;
  double t_p10_us = 0.0;
  double t_p90_us = 0.0;
};

struct TimingTable {
  std::uint64_t seed = 0;
  std::size_t repetitions = 0;
  std::vector<TimingRow> rows;
};

/// One row per (pieces, workers), pieces outer. Costs are integers drawn
/// uniformly from [1, 100], fresh for every repetition.
TimingTable run_scaling(IntRange pieces, IntRange workers, const BenchOptions& options = {});

struct ShrinkRow {
  std::size_t step = 0;       // 1-based
  std::size_t remaining = 0;  // merges left before this replan
  double t_median_us = 0.0;
  double t_p10_us = 0.0;
  double t_p90_us = 0.0;
};

struct ShrinkTable {
  std::size_t pieces = 0;
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  std::vector<ShrinkRow> rows;  // pieces - 1 steps
};

/// Replans after every completion of a simulated run that follows the plan.
ShrinkTable run_shrinking(std::size_t pieces, std::size_t workers, const BenchOptions& options = {});

enum class TableFormat { csv, json };

/// csv: "# seed=<n> repetitions=<n>" then the header
/// pieces,workers,nodes,arcs,t_median_us,t_p10_us,t_p90_us.
void emit_table(const TimingTable& table, TableFormat format, std::ostream& out);
void emit_table(const ShrinkTable& table, TableFormat format, std::ostream& out);

nlohmann::json timing_table_to_json(const TimingTable& table);
nlohmann::json shrink_table_to_json(const ShrinkTable& table);

/// Fraction of adjacent pairs with series[i] >= series[i - 1].
double ordered_fraction(const std::vector<double>& series);
/// Coefficient of determination of the least-squares line y = a + b x.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace aogalloc
