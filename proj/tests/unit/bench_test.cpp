#include <gtest/gtest.h>

#include <sstream>

#include "aogalloc/aog.hpp"
#include "aogalloc/bench.hpp"
#include "aogalloc/error.hpp"

using namespace aogalloc;

namespace {

BenchOptions quick() {
  BenchOptions o;
  o.repetitions = 3;
  o.min_batch_us = 0.0;
  return o;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Scaling, RowCountAndStructure) {
  const TimingTable t = run_scaling({2, 6}, {1, 3}, quick());
  ASSERT_EQ(t.rows.size(), 5u * 3u);
  EXPECT_EQ(t.rows.front().pieces, 2u);
  EXPECT_EQ(t.rows.front().workers, 1u);
  EXPECT_EQ(t.rows[1].workers, 2u);
  for (const TimingRow& r : t.rows) {
    EXPECT_EQ(r.nodes, linear_node_count(r.pieces));
    EXPECT_EQ(r.arcs, linear_arc_count(r.pieces, r.workers));
    EXPECT_LE(r.t_p10_us, r.t_median_us);
    EXPECT_LE(r.t_median_us, r.t_p90_us);
    EXPECT_GT(r.t_median_us, 0.0);
  }
}

TEST(Scaling, FifteenPieceRows) {
  const TimingTable t = run_scaling({15, 15}, {2, 2}, quick());
  EXPECT_EQ(t.rows[0].nodes, 120u);
  EXPECT_EQ(t.rows[0].arcs, 1120u);
  const TimingTable small = run_scaling({2, 2}, {2, 2}, quick());
  EXPECT_EQ(small.rows[0].nodes, 3u);
  EXPECT_EQ(small.rows[0].arcs, 2u);
}

TEST(Scaling, WorkersOnlyAddArcs) {
  const TimingTable t = run_scaling({10, 10}, {2, 6}, quick());
  for (const TimingRow& r : t.rows) {
    EXPECT_EQ(r.nodes, 55u);
    EXPECT_EQ(r.arcs, 165u * r.workers);
  }
}

TEST(Scaling, GuardRails) {
  EXPECT_THROW(run_scaling({2, kBenchMaxPieces + 1}, {2, 2}, quick()), Error);
  EXPECT_THROW(run_scaling({2, 3}, {1, kBenchMaxWorkers + 1}, quick()), Error);
  EXPECT_THROW(run_scaling({0, 3}, {1, 1}, quick()), Error);
  EXPECT_THROW(run_scaling({5, 3}, {1, 1}, quick()), Error);
  BenchOptions two = quick();
  two.repetitions = 2;
  EXPECT_THROW(run_scaling({2, 3}, {1, 1}, two), Error);
}

TEST(Emit, CsvHeaderIsStable) {
  const TimingTable a = run_scaling({2, 4}, {2, 2}, quick());
  const TimingTable b = run_scaling({2, 4}, {2, 2}, quick());
  std::ostringstream sa, sb;
  emit_table(a, TableFormat::csv, sa);
  emit_table(b, TableFormat::csv, sb);
  const auto la = lines(sa.str()), lb = lines(sb.str());
  ASSERT_EQ(la.size(), 2u + 3u);
  EXPECT_EQ(la[0], "# seed=1 repetitions=3");
  EXPECT_EQ(la[1], "pieces,workers,nodes,arcs,t_median_us,t_p10_us,t_p90_us");
  EXPECT_EQ(la[1], lb[1]);
  // Same seed: identical structural columns.
  for (std::size_t i = 2; i < la.size(); ++i) {
    auto structural = [](const std::string& l) {
      std::size_t pos = 0;
      for (int k = 0; k < 4; ++k) pos = l.find(',', pos) + 1;
      return l.substr(0, pos);
    };
    EXPECT_EQ(structural(la[i]), structural(lb[i]));
  }
}

TEST(Emit, JsonCarriesMetadata) {
  const TimingTable t = run_scaling({3, 3}, {2, 2}, quick());
  const auto doc = timing_table_to_json(t);
  EXPECT_EQ(doc["seed"], 1);
  EXPECT_EQ(doc["repetitions"], 3);
  ASSERT_EQ(doc["rows"].size(), 1u);
  EXPECT_EQ(doc["rows"][0]["nodes"], 6);
  std::ostringstream out;
  emit_table(t, TableFormat::json, out);
  EXPECT_EQ(nlohmann::json::parse(out.str()), doc);
}

TEST(Shrinking, StepCountAndEmission) {
  EXPECT_EQ(run_shrinking(2, 2, quick()).rows.size(), 1u);
  const ShrinkTable t = run_shrinking(8, 2, quick());
  ASSERT_EQ(t.rows.size(), 7u);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(t.rows[i].step, i + 1);
    EXPECT_EQ(t.rows[i].remaining, 7u - i);
  }
  std::ostringstream out;
  emit_table(t, TableFormat::csv, out);
  EXPECT_EQ(lines(out.str())[1], "step,remaining,t_median_us,t_p10_us,t_p90_us");
  EXPECT_EQ(shrink_table_to_json(t)["rows"].size(), 7u);
}

TEST(Shrinking, LastStepNoSlowerThanFirst) {
  BenchOptions o;
  o.repetitions = 5;
  const ShrinkTable t = run_shrinking(12, 2, o);
  EXPECT_LE(t.rows.back().t_median_us, t.rows.front().t_median_us);
}

TEST(Stats, OrderedFractionAndFit) {
  EXPECT_EQ(ordered_fraction({1, 2, 3, 4}), 1.0);
  EXPECT_EQ(ordered_fraction({1, 3, 2, 4, 5}), 0.75);
  EXPECT_NEAR(linear_fit_r2({1, 2, 3, 4}, {2, 4, 6, 8}), 1.0, 1e-12);
  // y = x^2 around 0 has no linear component.
  EXPECT_NEAR(linear_fit_r2({-2, -1, 0, 1, 2}, {4, 1, 0, 1, 4}), 0.0, 1e-12);
}
