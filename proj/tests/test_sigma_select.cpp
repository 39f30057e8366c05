#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "grabit/error.hpp"
#include "grabit/evaluation.hpp"
#include "grabit/normal.hpp"
#include "grabit/sigma_select.hpp"
#include "test_util.hpp"

namespace grabit {
namespace {

using testing::random_matrix;
using testing::random_vector;

const CensoringBounds kUpper = CensoringBounds::make(-kInf, 0.8);

Dataset censored(std::size_t n, std::uint64_t seed) {
  Dataset d;
  d.features = random_matrix(n, 3, seed);
  const auto e = random_vector(n, seed + 1, 0.4);
  d.response.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    d.response[r] = std::min(d.features(r, 0) + 0.5 * d.features(r, 1) * d.features(r, 2) + e[r], 0.8);
  }
  return d;
}

BoostConfig tobit_config(int trees, int depth) {
  BoostConfig c;
  c.n_trees = trees;
  c.shrinkage = 0.1;
  c.tree = {depth, 1};
  c.loss = Loss::tobit(kUpper, 1.0);
  return c;
}

// Depth-0 trees on uncensored data leave F at the sample mean, so
// l(sigma) = -SS / (2 sigma^2) - n log sigma - n/2 log(2 pi).
TEST(SigmaSelect, ClosedFormProfileLikelihood) {
  Dataset d;
  d.features = random_matrix(60, 1, 3);
  d.response = random_vector(60, 4, 1.7);
  const double mean = std::accumulate(d.response.begin(), d.response.end(), 0.0) / 60.0;
  double ss = 0.0;
  for (double y : d.response) ss += (y - mean) * (y - mean);
  BoostConfig cfg;
  cfg.n_trees = 1;
  cfg.tree = {0, 1};
  cfg.loss = Loss::tobit(CensoringBounds{}, 1.0);
  for (double sigma : {0.3, 1.0, 2.5}) {
    const double expected = -ss / (2.0 * sigma * sigma) - 60.0 * std::log(sigma) - 30.0 * std::log(2.0 * std::numbers::pi);
    EXPECT_NEAR(profile_loglik(sigma, d, cfg), expected, 1e-10 * std::abs(expected));
  }

  SigmaSearchConfig search;
  search.grid = {0.5, 1.0, 2.0, 4.0};
  search.refine = true;
  const auto sel = select_sigma(d, cfg, search);
  const double sigma_star = std::sqrt(ss / 60.0);
  EXPECT_NEAR(sel.sigma, sigma_star, 1e-3 * sigma_star);
  for (const auto& pt : sel.trace) EXPECT_LE(pt.loglik, sel.loglik);
}

TEST(SigmaSelect, GridMaximumAndTrace) {
  const Dataset d = censored(150, 5);
  const auto cfg = tobit_config(20, 2);
  SigmaSearchConfig search;
  search.grid = {10.0, 0.1, 1.0, 0.01, 100.0};
  const auto sel = select_sigma(d, cfg, search);
  ASSERT_EQ(sel.trace.size(), 5u);
  double best = -kInf;
  double best_sigma = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    if (k > 0) {
      EXPECT_LT(sel.trace[k - 1].sigma, sel.trace[k].sigma);
    }
    EXPECT_EQ(sel.trace[k].loglik, profile_loglik(sel.trace[k].sigma, d, cfg));
    if (sel.trace[k].loglik > best) {
      best = sel.trace[k].loglik;
      best_sigma = sel.trace[k].sigma;
    }
  }
  EXPECT_EQ(sel.sigma, best_sigma);
  EXPECT_EQ(sel.loglik, best);

  search.refine = true;
  const auto refined = select_sigma(d, cfg, search);
  EXPECT_GE(refined.loglik, best);
  EXPECT_EQ(refined.loglik, profile_loglik(refined.sigma, d, cfg));
}

TEST(SigmaSelect, PermutationInvariant) {
  const Dataset d = censored(120, 9);
  const auto cfg = tobit_config(15, 2);
  std::vector<std::size_t> perm(120);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::reverse(perm.begin(), perm.end());
  const Dataset p = d.select_rows(perm);
  for (double sigma : {0.1, 1.0}) {
    const double a = profile_loglik(sigma, d, cfg);
    EXPECT_NEAR(a, profile_loglik(sigma, p, cfg), 1e-9 * std::abs(a));
  }
}

TEST(SigmaSelect, RejectsBadGrids) {
  const Dataset d = censored(30, 2);
  const auto cfg = tobit_config(2, 1);
  for (const std::vector<double>& g : {std::vector<double>{}, {0.0, 1.0}, {1.0, 1.0}, {-1.0}}) {
    SigmaSearchConfig s;
    s.grid = g;
    EXPECT_THROW(select_sigma(d, cfg, s), Error);
  }
  BoostConfig sq;
  EXPECT_THROW(profile_loglik(1.0, d, sq), Error);
}

TEST(SigmaCv, MatchesExhaustiveLoop) {
  const Dataset d = censored(200, 13);
  const auto cfg = tobit_config(20, 2);
  SigmaSearchConfig search;
  search.grid = {0.1, 1.0, 10.0};
  const auto res = select_sigma_cv(d, cfg, search, {nullptr, 4});

  std::vector<double> mean(3, 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < 200; ++i) (i % 4 == k ? va : tr).push_back(i);
    const Dataset train = d.select_rows(tr);
    const Dataset valid = d.select_rows(va);
    std::vector<int> labels;
    for (double y : valid.response) labels.push_back(y == 0.8 ? 1 : 0);
    for (std::size_t g = 0; g < 3; ++g) {
      BoostConfig c = cfg;
      c.loss = Loss::tobit(kUpper, search.grid[g]);
      const auto model = fit_boosted(train, c);
      std::vector<double> s;
      for (std::size_t r = 0; r < valid.rows(); ++r) {
        s.push_back(normal::log_sf((0.8 - predict_latent(model, valid.features.row(r))) / search.grid[g]));
      }
      mean[g] += roc_auroc(s, labels).auroc / 4.0;
    }
  }
  ASSERT_EQ(res.mean_auroc.size(), 3u);
  for (std::size_t g = 0; g < 3; ++g) EXPECT_NEAR(res.mean_auroc[g], mean[g], 1e-12);
  const auto best = static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
  EXPECT_EQ(res.sigma, search.grid[best]);
  EXPECT_EQ(res.degenerate_folds, 0u);
}

TEST(SigmaCv, IdenticalAurocsPickSmallestSigma) {
  const Dataset d = censored(100, 17);
  const auto cfg = tobit_config(1, 0);  // constant F: every AUROC is 0.5
  SigmaSearchConfig search;
  search.grid = {10.0, 0.1, 1.0};
  const auto res = select_sigma_cv(d, cfg, search, {nullptr, 5});
  for (double a : res.mean_auroc) EXPECT_EQ(a, 0.5);
  EXPECT_EQ(res.sigma, 0.1);
}

TEST(SigmaCv, SingleClassValidationIsFlagged) {
  const Dataset d = censored(100, 19);
  Dataset valid;
  valid.features = random_matrix(10, 3, 20);
  valid.response.assign(10, 0.0);
  const auto cfg = tobit_config(5, 1);
  try {
    select_sigma_cv(d, cfg, {}, {&valid, 5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
  // Holdout with both classes works.
  valid.response[0] = 0.8;
  const auto res = select_sigma_cv(d, cfg, {}, {&valid, 5});
  EXPECT_EQ(res.degenerate_folds, 0u);
  EXPECT_EQ(res.grid.size(), 5u);
}

}  // namespace
}  // namespace grabit
