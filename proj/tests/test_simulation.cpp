#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "grabit/boosting.hpp"
#include "grabit/error.hpp"
#include "grabit/random.hpp"
#include "grabit/simulation.hpp"
#include "grabit/stats.hpp"

namespace grabit {
namespace {

TEST(DecisionFunction, Examples) {
  std::vector<double> x(30, 0.0);
  EXPECT_EQ(decision_fn_eval(DecisionFunction::kNonlinearInteraction, x), 0.0);
  x[0] = x[1] = 1.0;
  // 0.3 + 0.3 + (x1 x2)_+ = 1.6
  EXPECT_DOUBLE_EQ(decision_fn_eval(DecisionFunction::kNonlinearInteraction, x), 1.6);
  x[1] = -1.0;
  EXPECT_DOUBLE_EQ(decision_fn_eval(DecisionFunction::kNonlinearInteraction, x), 0.3);
  x.assign(30, 0.5);
  // 5 * 0.15 + 6 pairs * 0.25; x5 appears only in the main effects.
  EXPECT_DOUBLE_EQ(decision_fn_eval(DecisionFunction::kNonlinearInteraction, x), 0.75 + 1.5);
  x[4] = 0.0;
  x[29] = -1.0;
  EXPECT_DOUBLE_EQ(decision_fn_eval(DecisionFunction::kNonlinearInteraction, x), 0.6 + 1.5);

  EXPECT_DOUBLE_EQ(decision_fn_eval(DecisionFunction::kLinear, std::vector<double>(50, 0.4)), 5.0);
  std::vector<double> z(20, 0.0);
  EXPECT_DOUBLE_EQ(decision_fn_eval(DecisionFunction::kHighlyNonlinear, z), 2.0);
  z[3] = 0.25;  // ||x|| = 1/4: cos(pi) = -1
  EXPECT_NEAR(decision_fn_eval(DecisionFunction::kHighlyNonlinear, z), -2.0, 1e-15);
  EXPECT_THROW(decision_fn_eval(DecisionFunction::kLinear, z), Error);
}

TEST(Simulation, DeterministicPerSeedAndRole) {
  const auto s = preset("corr0.5");
  const auto a = simulate_split(s, 200, 3, SplitRole::kTrain);
  const auto b = simulate_split(s, 200, 3, SplitRole::kTrain);
  EXPECT_EQ(a.data.features, b.data.features);
  EXPECT_EQ(a.data.response, b.data.response);
  const auto c = simulate_split(s, 200, 3, SplitRole::kTest);
  const auto d = simulate_split(s, 200, 4, SplitRole::kTrain);
  EXPECT_NE(a.data.features, c.data.features);
  EXPECT_NE(a.data.features, d.data.features);
  // A prefix of a longer draw is the shorter draw.
  const auto longer = simulate_split(s, 300, 3, SplitRole::kTrain);
  EXPECT_TRUE(std::equal(a.data.response.begin(), a.data.response.end(), longer.data.response.begin()));
  auto small = s;
  small.n_train = small.n_valid = small.n_test = 200;
  const auto rep = simulate(small, 3);
  EXPECT_EQ(rep.train.data.features, a.data.features);
  EXPECT_EQ(rep.test.data.features, c.data.features);
}

TEST(Simulation, MatchesDrawOrderRecipe) {
  for (const std::string name : {"corr0.5", "corr0", "linear"}) {
    const auto s = preset(name);
    const auto split = simulate_split(s, 50, 2, SplitRole::kValid);
    Rng rng(derive_seed(s.seed, 2, 2));
    for (std::size_t i = 0; i < 50; ++i) {
      std::vector<double> x(s.p);
      for (double& v : x) v = -1.0 + 2.0 * rng.uniform();
      const double f = decision_fn_eval(s.decision_fn, x);
      const double y_star = f + s.sigma_eps * rng.normal();
      double ea = s.mu_a + s.sigma_a * rng.normal();
      const int c = y_star >= s.y_u;
      if (name == "corr0" && !c) {
        while (ea >= s.y_u) ea = s.mu_a + s.sigma_a * rng.normal();
      }
      for (std::size_t k = 0; k < s.p; ++k) EXPECT_EQ(split.data.features(i, k), x[k]);
      EXPECT_EQ(split.labels[i], c);
      EXPECT_EQ(split.decision[i], f);
      EXPECT_EQ(split.data.response[i], c ? s.y_u : (name == "corr0" ? ea : f + ea));
    }
  }
}

TEST(Simulation, AuxiliaryResponseIsConsistent) {
  for (const auto& name : preset_names()) {
    auto s = preset(name);
    const auto split = simulate_split(s, 2000, 0, SplitRole::kTrain);
    for (std::size_t i = 0; i < 2000; ++i) {
      if (split.labels[i] == 1) EXPECT_EQ(split.data.response[i], s.y_u) << name;
      else EXPECT_LT(split.data.response[i], s.y_u) << name;
      EXPECT_GE(split.data.features.row(i)[0], -1.0);
      EXPECT_LT(split.data.features.row(i)[0], 1.0);
    }
  }
}

TEST(Simulation, VanishingNoiseLabelsByDecisionFunction) {
  auto s = preset("corr0.5");
  s.sigma_eps = 1e-300;
  const auto split = simulate_split(s, 1000, 0, SplitRole::kTrain);
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ(split.labels[i], split.decision[i] >= s.y_u ? 1 : 0);
  s.y_u = 100.0;  // above the maximum of F
  const auto none = simulate_split(s, 1000, 0, SplitRole::kTrain);
  EXPECT_EQ(std::count(none.labels.begin(), none.labels.end(), 1), 0);
}

TEST(Simulation, PresetValues) {
  const auto names = preset_names();
  for (const std::string n : {"corr0.75", "corr0.5", "corr0.25", "corr0", "n100", "n10000", "minority1", "minority20",
                              "linear", "nonlinear"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  }
  EXPECT_EQ(preset("corr0.75").mu_a, -4.0);
  EXPECT_EQ(preset("corr0.75").sigma_a, 0.5);
  EXPECT_EQ(preset("corr0.25").sigma_a, 2.2);
  EXPECT_EQ(preset("minority10").y_u, 2.38);
  EXPECT_EQ(preset("n2000").n_test, 2000u);
  EXPECT_EQ(preset("corr0.5").y_u, 2.84);
  EXPECT_EQ(preset("corr0.5").sigma_eps, 0.7);
  EXPECT_EQ(preset("corr0").decision_fn, DecisionFunction::kZeroCorrelation);
  EXPECT_EQ(preset("nonlinear").p, 20u);
  EXPECT_THROW(preset("corr0.9"), Error);
}

TEST(Simulation, ScenarioParser) {
  const auto cfg = parse_scenario_config(
      "# comment\n"
      "preset = corr0.25\n"
      "n = 120   # all splits\n"
      "n_test = 80\n"
      "replications = 3\n"
      "seed = 9\n"
      "models = grabit, logit\n"
      "trees = 10,100\n"
      "sigma = 0.5\n");
  EXPECT_EQ(cfg.scenario.sigma_a, 2.2);
  EXPECT_EQ(cfg.scenario.n_train, 120u);
  EXPECT_EQ(cfg.scenario.n_test, 80u);
  EXPECT_EQ(cfg.scenario.seed, 9u);
  EXPECT_EQ(cfg.roster, (std::vector<StudyModel>{StudyModel::kGrabit, StudyModel::kLogit}));
  EXPECT_EQ(cfg.grid.n_trees, (std::vector<int>{10, 100}));
  EXPECT_EQ(cfg.grid.sigma, (std::vector<double>{0.5}));
  EXPECT_EQ(cfg.grid.depth, (std::vector<int>{3, 5, 10}));
  auto kind = [](const std::string& text) {
    try {
      parse_scenario_config(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  EXPECT_EQ(kind("bogus = 1\n"), ErrorKind::kSchema);
  EXPECT_EQ(kind("n 5\n"), ErrorKind::kSchema);
  EXPECT_EQ(kind("decision_fn = linear\np = 30\n"), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind("trees = 0\n"), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind("preset = nope\n"), ErrorKind::kInvalidArgument);
  EXPECT_EQ(study_model_from_string("Boosted-Logit"), StudyModel::kBoostedLogit);
  EXPECT_EQ(study_model_from_string("tobit"), StudyModel::kLinearTobit);
}

TEST(Study, TuningMatchesExhaustiveSearch) {
  auto s = preset("corr0.5");
  s.n_train = s.n_valid = s.n_test = 300;
  const auto rep = simulate(s, 1);
  TuningGrid grid;
  grid.n_trees = {20, 5};
  grid.shrinkage = {0.1, 0.3};
  grid.depth = {1, 2};
  grid.sigma = {0.1, 1.0};
  const auto tuned = tune_and_score(StudyModel::kGrabit, rep, grid, s.y_u);

  // Grid order: sigma, shrinkage, depth, then ascending M; first best wins.
  double best = -1.0;
  BoostConfig best_cfg;
  for (double sigma : grid.sigma) {
    for (double nu : grid.shrinkage) {
      for (int depth : grid.depth) {
        for (int m : {5, 20}) {
          BoostConfig c;
          c.n_trees = m;
          c.shrinkage = nu;
          c.tree.max_depth = depth;
          c.loss = Loss::tobit(CensoringBounds::make(-kInf, s.y_u), sigma);
          const auto model = fit_boosted(rep.train.data, c);
          const double auc = roc_auroc(predict_latent(model, rep.valid.data.features), rep.valid.labels).auroc;
          if (auc > best) {
            best = auc;
            best_cfg = c;
          }
        }
      }
    }
  }
  EXPECT_EQ(tuned.valid_auroc, best);
  EXPECT_EQ(tuned.test_scores, predict_latent(fit_boosted(rep.train.data, best_cfg), rep.test.data.features));
}

TEST(Study, DegenerateReplicationsAreExcluded) {
  StudyConfig cfg;
  cfg.scenario = preset("minority1");
  // About one default per hundred rows, so most 30-row splits have none.
  cfg.scenario.n_train = cfg.scenario.n_valid = cfg.scenario.n_test = 30;
  cfg.scenario.replications = 8;
  cfg.roster = {StudyModel::kLogit};
  const auto res = run_study(cfg);
  EXPECT_EQ(res.used_replications.size() + res.degenerate_replications.size(), 8u);
  EXPECT_FALSE(res.degenerate_replications.empty());
  EXPECT_EQ(res.models[0].curves.size(), res.used_replications.size());
}

TEST(Study, RunIsDeterministic) {
  StudyConfig cfg;
  cfg.scenario = preset("corr0.5");
  cfg.scenario.n_train = cfg.scenario.n_valid = cfg.scenario.n_test = 200;
  cfg.scenario.replications = 2;
  cfg.grid.n_trees = {10};
  cfg.grid.shrinkage = {0.1};
  cfg.grid.depth = {2};
  cfg.grid.sigma = {1.0};
  const auto a = run_study(cfg);
  const auto b = run_study(cfg);
  ASSERT_EQ(a.models.size(), 4u);
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_EQ(a.models[m].band.mean_auroc, b.models[m].band.mean_auroc);
    EXPECT_EQ(a.models[m].band.mean_tpr, b.models[m].band.mean_tpr);
    EXPECT_EQ(a.models[m].selections, b.models[m].selections);
  }
}

}  // namespace
}  // namespace grabit
