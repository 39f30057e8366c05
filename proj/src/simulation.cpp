#include "grabit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numbers>
#include <sstream>

#include "grabit/boosting.hpp"
#include "grabit/error.hpp"
#include "grabit/linear.hpp"
#include "grabit/random.hpp"

namespace grabit {
namespace {

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

SimulationScenario correlation_arm(double mu_a, double sigma_a) {
  SimulationScenario s;
  s.decision_fn = DecisionFunction::kNonlinearInteraction;
  s.p = 30;
  s.sigma_eps = 0.7;
  s.y_u = 2.84;
  s.mu_a = mu_a;
  s.sigma_a = sigma_a;
  return s;
}

SimulationScenario with_n(SimulationScenario s, std::size_t n) {
  s.n_train = s.n_valid = s.n_test = n;
  return s;
}

SimulationScenario with_threshold(SimulationScenario s, double y_u) {
  s.y_u = y_u;
  return s;
}

// Preset table. The linear and highly nonlinear arms use constants calibrated
// once by Monte Carlo (10^7 draws): y_u is the 95% quantile of Y*, sigma_eps
// equals sd(F), sigma_a gives corr(Y_a, F) = 0.5 over the C = 0 rows, and
// mu_a is the largest integer keeping every auxiliary draw below y_u.
const std::map<std::string, SimulationScenario>& preset_table() {
  static const std::map<std::string, SimulationScenario> table = [] {
    std::map<std::string, SimulationScenario> t;
    const SimulationScenario base = correlation_arm(-5.0, 0.98);
    t["corr0.75"] = correlation_arm(-4.0, 0.5);
    t["corr0.5"] = base;
    t["corr0.25"] = correlation_arm(-9.0, 2.2);
    SimulationScenario zero = correlation_arm(-4.0, 1.0);
    zero.decision_fn = DecisionFunction::kZeroCorrelation;
    t["corr0"] = zero;
    for (std::size_t n : {100, 200, 500, 2000, 10000}) t[fmt::format("n{}", n)] = with_n(base, n);
    t["minority1"] = with_threshold(base, 3.89);
    t["minority2"] = with_threshold(base, 3.44);
    t["minority10"] = with_threshold(base, 2.38);
    t["minority20"] = with_threshold(base, 1.89);

    SimulationScenario linear;
    linear.decision_fn = DecisionFunction::kLinear;
    linear.p = 50;
    linear.sigma_eps = 1.02;
    linear.y_u = 2.38;
    linear.mu_a = -8.0;
    linear.sigma_a = 1.68;
    t["linear"] = linear;

    SimulationScenario nonlinear;
    nonlinear.decision_fn = DecisionFunction::kHighlyNonlinear;
    nonlinear.p = 20;
    nonlinear.sigma_eps = 1.41;
    nonlinear.y_u = 3.26;
    nonlinear.mu_a = -11.0;
    nonlinear.sigma_a = 2.42;
    t["nonlinear"] = with_n(nonlinear, 10000);
    return t;
  }();
  return table;
}

bool has_both_classes(const std::vector<int>& labels) {
  const bool pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  return pos && neg;
}

Dataset binary_view(const SimulatedSplit& split) {
  Dataset d = split.data;
  d.response.assign(split.labels.begin(), split.labels.end());
  return d;
}

std::vector<std::size_t> sorted_stages(const std::vector<int>& n_trees) {
  std::vector<std::size_t> stages(n_trees.begin(), n_trees.end());
  std::sort(stages.begin(), stages.end());
  stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
  return stages;
}

struct Candidate {
  double valid_auroc = -1.0;
  BoostConfig config;
  std::size_t stages = 0;
  bool set = false;
};

// Fits with the largest M once per (sigma, nu, T) and scores every M of the
// grid from the staged validation predictions.
TunedScores tune_boosted(const SimulatedReplication& rep, const TuningGrid& grid, const std::vector<Loss>& losses,
                         const std::vector<double>& response, const std::vector<double>& loss_sigma) {
  const FeatureIndex index(rep.train.data.features);
  const auto stages = sorted_stages(grid.n_trees);
  Candidate best;
  std::size_t best_loss = 0;
  for (std::size_t li = 0; li < losses.size(); ++li) {
    for (double nu : grid.shrinkage) {
      for (int depth : grid.depth) {
        BoostConfig cfg;
        cfg.n_trees = static_cast<int>(stages.back());
        cfg.shrinkage = nu;
        cfg.tree.max_depth = depth;
        cfg.loss = losses[li];
        const BoostedEnsemble model = fit_boosted(index, response, cfg);
        const auto staged = staged_predictions(model, rep.valid.data.features, stages);
        for (std::size_t s = 0; s < stages.size(); ++s) {
          const double auc = roc_auroc(staged[s], rep.valid.labels).auroc;
          if (!best.set || auc > best.valid_auroc) {
            best = {auc, cfg, stages[s], true};
            best_loss = li;
          }
        }
      }
    }
  }
  BoostConfig final_cfg = best.config;
  final_cfg.n_trees = static_cast<int>(best.stages);
  const BoostedEnsemble model = fit_boosted(index, response, final_cfg);

  TunedScores out;
  out.test_scores = predict_latent(model, rep.test.data.features);
  out.valid_auroc = best.valid_auroc;
  out.selection = fmt::format("M={} nu={} T={}", best.stages, final_cfg.shrinkage, final_cfg.tree.max_depth);
  if (!loss_sigma.empty()) out.selection += fmt::format(" sigma={}", loss_sigma[best_loss]);
  return out;
}

std::vector<double> score_linear(const LinearModel& model, const Matrix& x) {
  std::vector<double> s(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) s[r] = predict_linear(model, x.row(r));
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) fail(ErrorKind::kSchema, fmt::format("scenario key '{}': '{}' is not a number", key, v));
  return d;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long u = 0;
  try {
    u = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v.front() == '-') {
    fail(ErrorKind::kSchema, fmt::format("scenario key '{}': '{}' is not a non-negative integer", key, v));
  }
  return u;
}

}  // namespace

std::string to_string(DecisionFunction fn) {
  switch (fn) {
    case DecisionFunction::kNonlinearInteraction:
      return "nonlinear_interaction";
    case DecisionFunction::kLinear:
      return "linear";
    case DecisionFunction::kHighlyNonlinear:
      return "highly_nonlinear";
    case DecisionFunction::kZeroCorrelation:
      return "zero_correlation";
  }
  return "unknown";
}

DecisionFunction decision_function_from_string(const std::string& name) {
  for (auto fn : {DecisionFunction::kNonlinearInteraction, DecisionFunction::kLinear,
                  DecisionFunction::kHighlyNonlinear, DecisionFunction::kZeroCorrelation}) {
    if (to_string(fn) == name) return fn;
  }
  fail(ErrorKind::kInvalidArgument, fmt::format("unknown decision function '{}'", name));
}

std::size_t decision_fn_dimension(DecisionFunction fn) {
  switch (fn) {
    case DecisionFunction::kLinear:
      return 50;
    case DecisionFunction::kHighlyNonlinear:
      return 20;
    case DecisionFunction::kNonlinearInteraction:
    case DecisionFunction::kZeroCorrelation:
      return 30;
  }
  return 0;
}

double decision_fn_eval(DecisionFunction fn, std::span<const double> x) {
  if (x.size() != decision_fn_dimension(fn)) {
    fail(ErrorKind::kInvalidArgument,
         fmt::format("{} expects {} inputs, got {}", to_string(fn), decision_fn_dimension(fn), x.size()));
  }
  switch (fn) {
    case DecisionFunction::kNonlinearInteraction:
    case DecisionFunction::kZeroCorrelation: {
      double f = 0.0;
      for (std::size_t k = 0; k < 5; ++k) f += 0.3 * positive_part(x[k]);
      for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t j = k + 1; j < 4; ++j) f += positive_part(x[k] * x[j]);
      }
      return f;
    }
    case DecisionFunction::kLinear: {
      double s = 0.0;
      for (double v : x) s += v;
      return 0.25 * s;
    }
    case DecisionFunction::kHighlyNonlinear: {
      double ss = 0.0;
      for (double v : x) ss += v * v;
      return 2.0 * std::cos(4.0 * std::numbers::pi * std::sqrt(ss));
    }
  }
  return 0.0;
}

void SimulationScenario::validate() const {
  require(p == decision_fn_dimension(decision_fn),
          fmt::format("{} needs p = {}, got {}", to_string(decision_fn), decision_fn_dimension(decision_fn), p));
  require(sigma_eps > 0.0 && std::isfinite(sigma_eps), "sigma_eps must be positive");
  require(sigma_a > 0.0 && std::isfinite(sigma_a), "sigma_a must be positive");
  require(std::isfinite(y_u) && std::isfinite(mu_a), "y_u and mu_a must be finite");
  require(n_train >= 1 && n_valid >= 1 && n_test >= 1, "split sizes must be >= 1");
  require(replications >= 1, "replications must be >= 1");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : preset_table()) names.push_back(name);
  return names;
}

SimulationScenario preset(const std::string& name) {
  const auto& t = preset_table();
  const auto it = t.find(name);
  if (it == t.end()) fail(ErrorKind::kInvalidArgument, fmt::format("unknown preset '{}'", name));
  return it->second;
}

SimulatedSplit simulate_split(const SimulationScenario& scenario, std::size_t n, std::size_t replication,
                              SplitRole role) {
  scenario.validate();
  Rng rng(derive_seed(scenario.seed, replication, static_cast<std::uint64_t>(role)));
  const std::size_t p = scenario.p;
  const bool independent = scenario.decision_fn == DecisionFunction::kZeroCorrelation;

  SimulatedSplit out;
  out.data.features = Matrix(n, p);
  out.data.response.resize(n);
  out.data.feature_names.reserve(p);
  for (std::size_t k = 0; k < p; ++k) out.data.feature_names.push_back(fmt::format("x{}", k + 1));
  out.labels.resize(n);
  out.decision.resize(n);

  // Per row: p uniforms, then eps, then eps_a (redrawn while >= y_u in the
  // independent variant).
  for (std::size_t i = 0; i < n; ++i) {
    auto x = out.data.features.row(i);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const double f = decision_fn_eval(scenario.decision_fn, x);
    const double y_star = f + rng.normal(0.0, scenario.sigma_eps);
    double eps_a = rng.normal(scenario.mu_a, scenario.sigma_a);
    const int c = y_star >= scenario.y_u ? 1 : 0;
    if (independent && c == 0) {
      while (eps_a >= scenario.y_u) eps_a = rng.normal(scenario.mu_a, scenario.sigma_a);
    }
    out.labels[i] = c;
    out.decision[i] = f;
    out.data.response[i] = c == 1 ? scenario.y_u : (independent ? eps_a : f + eps_a);
  }
  return out;
}

SimulatedReplication simulate(const SimulationScenario& scenario, std::size_t replication) {
  return {simulate_split(scenario, scenario.n_train, replication, SplitRole::kTrain),
          simulate_split(scenario, scenario.n_valid, replication, SplitRole::kValid),
          simulate_split(scenario, scenario.n_test, replication, SplitRole::kTest)};
}

std::string to_string(StudyModel model) {
  switch (model) {
    case StudyModel::kGrabit:
      return "Grabit";
    case StudyModel::kBoostedLogit:
      return "BoostedLogit";
    case StudyModel::kLogit:
      return "Logit";
    case StudyModel::kLinearTobit:
      return "Tobit";
  }
  return "unknown";
}

StudyModel study_model_from_string(const std::string& name) {
  std::string lower;
  for (char ch : name) {
    if (ch != '-' && ch != '_') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (lower == "grabit") return StudyModel::kGrabit;
  if (lower == "boostedlogit") return StudyModel::kBoostedLogit;
  if (lower == "logit") return StudyModel::kLogit;
  if (lower == "tobit" || lower == "lineartobit") return StudyModel::kLinearTobit;
  fail(ErrorKind::kInvalidArgument, fmt::format("unknown study model '{}'", name));
}

std::vector<StudyModel> all_study_models() {
  return {StudyModel::kGrabit, StudyModel::kBoostedLogit, StudyModel::kLogit, StudyModel::kLinearTobit};
}

void TuningGrid::validate() const {
  require(!n_trees.empty() && !shrinkage.empty() && !depth.empty() && !sigma.empty(), "tuning grids must be nonempty");
  for (int m : n_trees) require(m >= 1, "grid tree counts must be >= 1");
  for (double nu : shrinkage) require(nu > 0.0 && nu <= 1.0, "grid shrinkage values must lie in (0, 1]");
  for (int t : depth) TreeConfig{t, 1}.validate();
  for (double s : sigma) require(s > 0.0 && std::isfinite(s), "grid sigma values must be positive");
}

TunedScores tune_and_score(StudyModel model, const SimulatedReplication& rep, const TuningGrid& grid, double y_u) {
  grid.validate();
  const CensoringBounds bounds = CensoringBounds::make(-kInf, y_u);
  switch (model) {
    case StudyModel::kGrabit: {
      std::vector<Loss> losses;
      for (double s : grid.sigma) losses.push_back(Loss::tobit(bounds, s));
      return tune_boosted(rep, grid, losses, rep.train.data.response, grid.sigma);
    }
    case StudyModel::kBoostedLogit: {
      const std::vector<double> c(rep.train.labels.begin(), rep.train.labels.end());
      return tune_boosted(rep, grid, {Loss::bernoulli_logit()}, c, {});
    }
    case StudyModel::kLogit: {
      const LinearModel m = fit_logit(binary_view(rep.train));
      TunedScores out;
      out.test_scores = score_linear(m, rep.test.data.features);
      out.valid_auroc = roc_auroc(score_linear(m, rep.valid.data.features), rep.valid.labels).auroc;
      out.selection = to_string(m.status);
      return out;
    }
    case StudyModel::kLinearTobit: {
      const LinearModel m = fit_linear_tobit(rep.train.data, bounds);
      TunedScores out;
      out.test_scores = score_linear(m, rep.test.data.features);
      out.valid_auroc = roc_auroc(score_linear(m, rep.valid.data.features), rep.valid.labels).auroc;
      out.selection = fmt::format("sigma={:.6g} {}", m.sigma, to_string(m.status));
      return out;
    }
  }
  fail(ErrorKind::kInvalidArgument, "unknown study model");
}

StudyResult run_study(const StudyConfig& config) {
  config.scenario.validate();
  config.grid.validate();
  require(!config.roster.empty(), "the model roster is empty");

  StudyResult result;
  for (StudyModel m : config.roster) result.models.push_back({m, {}, {}, {}});

  for (std::size_t r = 0; r < config.scenario.replications; ++r) {
    const SimulatedReplication rep = simulate(config.scenario, r);
    if (!has_both_classes(rep.train.labels) || !has_both_classes(rep.valid.labels) ||
        !has_both_classes(rep.test.labels)) {
      result.degenerate_replications.push_back(r);
      continue;
    }
    result.used_replications.push_back(r);
    for (auto& m : result.models) {
      const TunedScores scores = tune_and_score(m.model, rep, config.grid, config.scenario.y_u);
      m.curves.push_back(roc_auroc(scores.test_scores, rep.test.labels));
      m.selections.push_back(scores.selection);
    }
  }
  if (result.used_replications.empty()) {
    fail(ErrorKind::kNumerical, "every replication had a single-class split; no ROC curves to aggregate");
  }
  for (auto& m : result.models) m.band = aggregate_roc(m.curves);
  return result;
}

StudyConfig parse_scenario_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kSchema, fmt::format("scenario line {}: expected key = value", line_no));
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  StudyConfig cfg;
  for (const auto& [k, v] : entries) {
    if (k == "preset") cfg.scenario = preset(v);
  }
  for (const auto& [k, v] : entries) {
    SimulationScenario& s = cfg.scenario;
    if (k == "preset") continue;
    if (k == "decision_fn") {
      s.decision_fn = decision_function_from_string(v);
      s.p = decision_fn_dimension(s.decision_fn);
    } else if (k == "p") s.p = parse_unsigned(k, v);
    else if (k == "sigma_eps") s.sigma_eps = parse_double(k, v);
    else if (k == "y_u") s.y_u = parse_double(k, v);
    else if (k == "mu_a") s.mu_a = parse_double(k, v);
    else if (k == "sigma_a") s.sigma_a = parse_double(k, v);
    else if (k == "n") s.n_train = s.n_valid = s.n_test = parse_unsigned(k, v);
    else if (k == "n_train") s.n_train = parse_unsigned(k, v);
    else if (k == "n_valid") s.n_valid = parse_unsigned(k, v);
    else if (k == "n_test") s.n_test = parse_unsigned(k, v);
    else if (k == "replications") s.replications = parse_unsigned(k, v);
    else if (k == "seed") s.seed = parse_unsigned(k, v);
    else if (k == "models") {
      cfg.roster.clear();
      for (const auto& name : split_list(v)) cfg.roster.push_back(study_model_from_string(name));
    } else if (k == "trees") {
      cfg.grid.n_trees.clear();
      for (const auto& t : split_list(v)) cfg.grid.n_trees.push_back(static_cast<int>(parse_unsigned(k, t)));
    } else if (k == "shrinkage") {
      cfg.grid.shrinkage.clear();
      for (const auto& t : split_list(v)) cfg.grid.shrinkage.push_back(parse_double(k, t));
    } else if (k == "depth") {
      cfg.grid.depth.clear();
      for (const auto& t : split_list(v)) cfg.grid.depth.push_back(static_cast<int>(parse_unsigned(k, t)));
    } else if (k == "sigma") {
      cfg.grid.sigma.clear();
      for (const auto& t : split_list(v)) cfg.grid.sigma.push_back(parse_double(k, t));
    } else {
      fail(ErrorKind::kSchema, fmt::format("unknown scenario key '{}'", k));
    }
  }
  cfg.scenario.validate();
  cfg.grid.validate();
  return cfg;
}

}  // namespace grabit
