#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "grabit/error.hpp"
#include "grabit/interpretation.hpp"
#include "grabit/simulation.hpp"
#include "test_util.hpp"

namespace grabit {
namespace {

using testing::random_matrix;
using testing::random_vector;

Dataset data_on_first_two(std::size_t n, std::uint64_t seed) {
  Dataset d;
  d.features = random_matrix(n, 5, seed);
  const auto e = random_vector(n, seed + 1, 0.1);
  for (std::size_t r = 0; r < n; ++r) d.response.push_back(2.0 * d.features(r, 0) - std::abs(d.features(r, 1)) + e[r]);
  return d;
}

BoostedEnsemble fit(const Dataset& d, int trees, int depth) {
  BoostConfig c;
  c.n_trees = trees;
  c.tree = {depth, 1};
  return fit_boosted(d, c);
}

TEST(Importance, SingleSplitGain) {
  // y = {0, 0, 3, 3}: the split removes the whole SSE of 9.
  Dataset d;
  d.features = Matrix(4, 2, {1, 0, 2, 0, 3, 0, 4, 0});
  d.response = {0, 0, 3, 3};
  const auto m = fit(d, 1, 1);
  const auto imp = variable_importance(m, 2);
  EXPECT_DOUBLE_EQ(imp.scores[0], 9.0);
  EXPECT_EQ(imp.scores[1], 0.0);
  EXPECT_EQ(imp.ranked, (std::vector<std::size_t>{0, 1}));

  // y = {0, 0, 0, 5} scaled by sqrt(0.4): SSE 18.75 * 0.4 = 7.5, all removed at 3.5.
  d.response = {0, 0, 0, 5};
  for (auto& y : d.response) y *= std::sqrt(0.4);
  EXPECT_NEAR(variable_importance(fit(d, 1, 1), 2).scores[0], 7.5, 1e-12);
}

TEST(Importance, UnusedVariablesScoreZero) {
  const Dataset d = data_on_first_two(300, 3);
  const auto m = fit(d, 50, 3);
  const auto imp = variable_importance(m, 5);
  std::set<int> used;
  for (const auto& t : m.trees()) {
    for (const auto& n : t.nodes()) {
      if (!n.is_leaf()) used.insert(n.feature);
    }
  }
  for (int v = 0; v < 5; ++v) {
    if (!used.count(v)) EXPECT_EQ(imp.scores[static_cast<std::size_t>(v)], 0.0);
    else EXPECT_GT(imp.scores[static_cast<std::size_t>(v)], 0.0);
  }
  EXPECT_EQ(imp.ranked[0], 0u);
  EXPECT_THROW(variable_importance(m, 4), Error);
  const auto stump = fit(d, 5, 0);
  for (double s : variable_importance(stump, 5).scores) EXPECT_EQ(s, 0.0);
}

TEST(Importance, TotalEqualsSseReduction) {
  // One squared-loss tree fitted to y - mean: its total gain equals the SSE
  // of y minus the SSE left within the leaves.
  const Dataset d = data_on_first_two(200, 5);
  const auto m = fit(d, 1, 4);
  const auto imp = variable_importance(m, 5);
  double total = 0.0;
  for (double s : imp.scores) total += s;
  double mean = 0.0;
  for (double y : d.response) mean += y / 200.0;
  double sse = 0.0;
  std::map<int, std::vector<double>> leaves;
  for (std::size_t r = 0; r < 200; ++r) {
    sse += (d.response[r] - mean) * (d.response[r] - mean);
    leaves[m.trees()[0].leaf_index(d.features.row(r))].push_back(d.response[r]);
  }
  double within = 0.0;
  for (const auto& [leaf, ys] : leaves) {
    double mu = 0.0;
    for (double y : ys) mu += y / static_cast<double>(ys.size());
    for (double y : ys) within += (y - mu) * (y - mu);
  }
  EXPECT_NEAR(total, sse - within, 1e-12 * sse);
}

TEST(PartialDependence, IgnoredVariableIsFlat) {
  const Dataset d = data_on_first_two(200, 7);
  const auto m = fit(d, 30, 2);
  std::set<int> used;
  for (const auto& t : m.trees()) {
    for (const auto& n : t.nodes()) used.insert(n.feature);
  }
  for (std::size_t v = 0; v < 5; ++v) {
    if (used.count(static_cast<int>(v))) continue;
    const std::vector<std::size_t> vars{v};
    const auto pd = partial_dependence(m, d.features, vars, 20);
    for (double val : pd.values) EXPECT_EQ(val, pd.values[0]);
  }
}

TEST(PartialDependence, SingleRowIsPrediction) {
  const Dataset d = data_on_first_two(100, 9);
  const auto m = fit(d, 20, 3);
  const Matrix one = d.features.select_rows(std::vector<std::size_t>{4});
  const std::vector<std::size_t> vars{0};
  const auto pd = partial_dependence(m, one, vars, 10);
  ASSERT_EQ(pd.values.size(), 1u);  // min == max: a single grid point
  EXPECT_EQ(pd.values[0], predict_latent(m, one.row(0)));
}

TEST(PartialDependence, DepthOneLevels) {
  // A single stump on variable 0: PD takes two levels, the Newton leaf values
  // shifted by f0, switching at the threshold.
  Dataset d;
  d.features = Matrix(4, 2, {1, 5, 2, 6, 3, 7, 4, 8});
  d.response = {0, 0, 2, 2};
  const auto m = fit(d, 1, 1);
  const std::vector<std::size_t> v0{0};
  const auto pd = partial_dependence(m, d.features, v0, 4);
  EXPECT_EQ(pd.axes[0], (std::vector<double>{1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(pd.values[0], 1.0 - 0.1);
  EXPECT_DOUBLE_EQ(pd.values[1], 1.0 - 0.1);
  EXPECT_DOUBLE_EQ(pd.values[2], 1.0 + 0.1);
  EXPECT_DOUBLE_EQ(pd.values[3], 1.0 + 0.1);
  const std::vector<std::size_t> both{0, 1};
  const auto pd2 = partial_dependence(m, d.features, both, 3);
  ASSERT_EQ(pd2.values.size(), 9u);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(pd2.values[a * 3 + b], pd2.values[a * 3]);
  }
  EXPECT_THROW(partial_dependence(m, d.features, std::vector<std::size_t>{0, 0}), Error);
  EXPECT_THROW(partial_dependence(m, Matrix(0, 2), v0), Error);
}

TEST(LocalDependence, CurvePassesThroughPrediction) {
  const Dataset d = data_on_first_two(150, 11);
  const auto m = fit(d, 40, 3);
  const auto summaries = summarize_features(d.features);
  for (auto strategy : {IntervalStrategy::kRange, IntervalStrategy::kWinsorized, IntervalStrategy::kSd,
                        IntervalStrategy::kDelta}) {
    LocalOptions opt;
    opt.strategy = strategy;
    opt.grid_size = 25;
    opt.delta.assign(5, 0.3);
    for (std::size_t r : {0u, 17u, 99u}) {
      for (std::size_t v = 0; v < 5; ++v) {
        const auto c = local_partial_dependence(m, summaries, d.features.row(r), v, opt);
        EXPECT_EQ(c.grid[c.marker], d.features(r, v));
        EXPECT_EQ(c.values[c.marker], predict_latent(m, d.features.row(r)));
        EXPECT_EQ(c.prediction, c.values[c.marker]);
        EXPECT_TRUE(std::is_sorted(c.grid.begin(), c.grid.end()));
      }
    }
  }
}

TEST(LocalDependence, BreakpointsAreTreeThresholds) {
  const Dataset d = data_on_first_two(150, 13);
  const auto m = fit(d, 10, 2);
  const auto summaries = summarize_features(d.features);
  LocalOptions opt;
  opt.grid_size = 400;
  const auto c = local_partial_dependence(m, summaries, d.features.row(3), 0, opt);
  std::vector<double> thresholds;
  for (const auto& t : m.trees()) {
    for (const auto& n : t.nodes()) {
      if (n.feature == 0) thresholds.push_back(n.threshold);
    }
  }
  for (std::size_t k = 1; k < c.grid.size(); ++k) {
    if (c.values[k] == c.values[k - 1]) continue;
    // Some split threshold on variable 0 lies in [grid[k-1], grid[k]).
    const bool found = std::any_of(thresholds.begin(), thresholds.end(),
                                   [&](double t) { return t >= c.grid[k - 1] && t < c.grid[k]; });
    EXPECT_TRUE(found) << k;
  }
}

TEST(LocalImportance, WinsorizedNeverExceedsRange) {
  const Dataset d = data_on_first_two(150, 15);
  const auto m = fit(d, 40, 3);
  const auto summaries = summarize_features(d.features);
  LocalOptions opt;
  for (std::size_t r = 0; r < 20; ++r) {
    const auto full = local_importance(m, summaries, d.features.row(r), opt, false);
    const auto win = local_importance(m, summaries, d.features.row(r), opt, true);
    for (std::size_t v = 0; v < 5; ++v) {
      EXPECT_GE(full[v], 0.0);
      EXPECT_LE(win[v], full[v] + 1e-15);
    }
  }
}

TEST(LocalImportance, ZeroWidthIntervals) {
  Matrix x(3, 2, {1, 0, 2, 0, 3, 0});
  Dataset d;
  d.features = x;
  d.response = {0, 1, 2};
  const auto m = fit(d, 3, 1);
  const auto summaries = summarize_features(x);
  LocalOptions opt;
  const auto imp = local_importance(m, summaries, x.row(0), opt, false);
  EXPECT_EQ(imp[1], 0.0);
  EXPECT_GT(imp[0], 0.0);
  EXPECT_THROW(local_partial_dependence(m, summaries, x.row(0), 1, opt), Error);
  opt.strategy = IntervalStrategy::kDelta;
  EXPECT_THROW(local_interval(summaries[0], 1.0, 0, opt), Error);
  opt.delta = {0.0, 1.0};
  EXPECT_THROW(local_interval(summaries[0], 1.0, 0, opt), Error);
  EXPECT_EQ(interval_strategy_from_string("iii"), IntervalStrategy::kSd);
  EXPECT_EQ(interval_strategy_from_string("winsorized"), IntervalStrategy::kWinsorized);
  EXPECT_THROW(interval_strategy_from_string("v"), Error);
}

TEST(Importance, RecoversActiveVariablesOfInteractionDgp) {
  auto s = preset("corr0.5");
  const auto split = simulate_split(s, 2000, 0, SplitRole::kTrain);
  Dataset d = split.data;
  d.response = split.decision;
  const auto m = fit(d, 200, 3);
  const auto imp = variable_importance(m, s.p);
  // Only x1..x5 enter the decision function.
  std::set<std::size_t> top(imp.ranked.begin(), imp.ranked.begin() + 5);
  EXPECT_EQ(top, (std::set<std::size_t>{0, 1, 2, 3, 4}));
}

}  // namespace
}  // namespace grabit
