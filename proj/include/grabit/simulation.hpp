#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grabit/dataset.hpp"
#include "grabit/evaluation.hpp"

namespace grabit {

enum class DecisionFunction {
  kNonlinearInteraction,  // sum_k 0.3 (x_k)_+ over k<=5 plus pairwise (x_k x_j)_+ over k<j<=4, p = 30
  kLinear,                // 0.25 sum_k x_k, p = 50
  kHighlyNonlinear,       // 2 cos(4 pi ||x_{1..20}||), p = 20
  kZeroCorrelation,       // nonlinear-interaction F with auxiliary noise independent of F
};

std::string to_string(DecisionFunction fn);
DecisionFunction decision_function_from_string(const std::string& name);

/// Input dimension each decision function is defined on.
std::size_t decision_fn_dimension(DecisionFunction fn);

double decision_fn_eval(DecisionFunction fn, std::span<const double> x);

/// Data-generating process for one study arm:
///   X_k ~ U(-1, 1), Y* = F(X) + eps, eps ~ N(0, sigma_eps^2), C = 1{Y* >= y_u},
///   Y_a = C y_u + (1 - C)(F(X) + eps_a), eps_a ~ N(mu_a, sigma_a^2).
/// In the zero-correlation variant Y_a = C y_u + (1 - C) eps_a, with draws of
/// eps_a at or above y_u rejected and redrawn.
struct SimulationScenario {
  DecisionFunction decision_fn = DecisionFunction::kNonlinearInteraction;
  std::size_t p = 30;
  double sigma_eps = 0.7;
  double y_u = 2.84;
  double mu_a = -5.0;
  double sigma_a = 0.98;
  std::size_t n_train = 500;
  std::size_t n_valid = 500;
  std::size_t n_test = 500;
  std::size_t replications = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Named parameter sets. Correlation presets: corr0.75, corr0.5, corr0.25,
/// corr0. Sample-size presets n100..n10000 and minority presets minority1,
/// minority2, minority10, minority20 vary the corr0.5 arm. `linear` and
/// `nonlinear` use the alternative decision functions.
std::vector<std::string> preset_names();
SimulationScenario preset(const std::string& name);

/// One simulated split. `data.response` holds Y_a; `labels` holds C.
struct SimulatedSplit {
  Dataset data;
  std::vector<int> labels;
  std::vector<double> decision;  // F(X)
};

struct SimulatedReplication {
  SimulatedSplit train;
  SimulatedSplit valid;
  SimulatedSplit test;
};

enum class SplitRole : std::uint64_t { kTrain = 1, kValid = 2, kTest = 3, kCalibration = 4 };

/// n rows drawn from the stream derived from (scenario.seed, replication, role).
SimulatedSplit simulate_split(const SimulationScenario& scenario, std::size_t n, std::size_t replication,
                              SplitRole role);

SimulatedReplication simulate(const SimulationScenario& scenario, std::size_t replication);

enum class StudyModel { kGrabit, kBoostedLogit, kLogit, kLinearTobit };

std::string to_string(StudyModel model);
StudyModel study_model_from_string(const std::string& name);
std::vector<StudyModel> all_study_models();

struct TuningGrid {
  std::vector<int> n_trees{10, 100, 1000};
  std::vector<double> shrinkage{0.1, 0.01, 0.001};
  std::vector<int> depth{3, 5, 10};
  std::vector<double> sigma{0.01, 0.1, 1.0, 10.0, 100.0};

  void validate() const;
};

struct StudyConfig {
  SimulationScenario scenario;
  std::vector<StudyModel> roster = all_study_models();
  TuningGrid grid;
};

/// Test-set scores of one model in one replication, after validation tuning.
struct TunedScores {
  std::vector<double> test_scores;
  double valid_auroc = 0.5;
  std::string selection;  // human-readable chosen tuning parameters
};

/// Fits one roster model on the training split, picks tuning parameters by
/// validation AUROC (first best in grid order wins ties) and scores the test
/// split. Boosted models are scored by their latent F, which ranks rows
/// exactly as the default probability does.
TunedScores tune_and_score(StudyModel model, const SimulatedReplication& rep, const TuningGrid& grid, double y_u);

struct ModelStudyResult {
  StudyModel model;
  std::vector<RocCurve> curves;  // one per usable replication
  std::vector<std::string> selections;
  RocBand band;
};

struct StudyResult {
  std::vector<ModelStudyResult> models;
  std::vector<std::size_t> used_replications;
  std::vector<std::size_t> degenerate_replications;  // a split had a single class
};

StudyResult run_study(const StudyConfig& config);

/// Parses a flat `key = value` scenario file (# starts a comment). A
/// `preset` key, if present, supplies defaults that later keys override.
StudyConfig parse_scenario_config(const std::string& text);

}  // namespace grabit
