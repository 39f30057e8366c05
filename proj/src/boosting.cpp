#include "grabit/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "grabit/error.hpp"
#include "grabit/normal.hpp"

namespace grabit {

void BoostConfig::validate() const {
  require(n_trees >= 1, fmt::format("number of trees must be >= 1, got {}", n_trees));
  require(shrinkage > 0.0 && shrinkage <= 1.0, fmt::format("shrinkage must lie in (0, 1], got {}", shrinkage));
  require(hessian_floor > 0.0, "hessian floor must be positive");
  tree.validate();
}

BoostedEnsemble::BoostedEnsemble(Loss loss, double f0, double shrinkage, std::vector<RegressionTree> trees,
                                 std::size_t n_features)
    : loss_(std::move(loss)), f0_(f0), shrinkage_(shrinkage), trees_(std::move(trees)), n_features_(n_features) {
  require(std::isfinite(f0_), "initial prediction must be finite");
  require(shrinkage_ > 0.0 && shrinkage_ <= 1.0, "shrinkage must lie in (0, 1]");
  for (const auto& t : trees_) {
    if (t.n_features() != n_features_) fail(ErrorKind::kSchema, "tree width does not match the ensemble");
  }
}

double BoostedEnsemble::raw_predict(std::span<const double> x, std::size_t stages) const {
  double f = f0_;
  for (std::size_t m = 0; m < stages; ++m) f += shrinkage_ * trees_[m].predict(x);
  return f;
}

BoostedEnsemble BoostedEnsemble::truncated(std::size_t m) const {
  require(m <= trees_.size(), "cannot truncate beyond the number of trees");
  return BoostedEnsemble(loss_, f0_, shrinkage_, std::vector<RegressionTree>(trees_.begin(), trees_.begin() + static_cast<std::ptrdiff_t>(m)),
                         n_features_);
}

BoostedEnsemble fit_boosted(const FeatureIndex& index, std::span<const double> response, const BoostConfig& config,
                            FitTrace* trace) {
  config.validate();
  const std::size_t n = index.rows();
  if (n == 0) fail(ErrorKind::kInvalidArgument, "cannot boost on an empty dataset");
  if (response.size() != n) fail(ErrorKind::kInvalidArgument, "response length does not match the feature rows");
  const Loss& loss = config.loss;
  loss.validate_responses(response);

  const double f0 = loss.initial_prediction(response);
  std::vector<double> f(n, f0);
  std::vector<double> grad(n), hess(n), pseudo(n);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(config.n_trees));

  auto total_loss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += loss.value(response[i], f[i]);
    return s;
  };
  if (trace) trace->training_loss = {total_loss()};

  for (int m = 0; m < config.n_trees; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = loss.gradient(response[i], f[i]);
      hess[i] = std::max(loss.hessian(response[i], f[i]), config.hessian_floor);
      pseudo[i] = -grad[i];
      if (!std::isfinite(grad[i]) || !std::isfinite(hess[i])) {
        fail(ErrorKind::kNumerical, fmt::format("non-finite gradient or Hessian at row {} in stage {}", i, m + 1));
      }
    }
    RegressionTree tree = fit_least_squares(index, pseudo, config.tree);
    const std::vector<int> leaves = tree.training_leaves();
    tree = newton_update_leaves(std::move(tree), grad, hess);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] += config.shrinkage * tree.nodes()[static_cast<std::size_t>(leaves[i])].value;
    }
    trees.push_back(std::move(tree));
    if (trace) trace->training_loss.push_back(total_loss());
  }
  return BoostedEnsemble(loss, f0, config.shrinkage, std::move(trees), index.cols());
}

BoostedEnsemble fit_boosted(const Dataset& data, const BoostConfig& config, FitTrace* trace) {
  data.validate();
  for (double v : data.features.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::kNumerical, "features must be finite; impute missing values first");
  }
  const FeatureIndex index(data.features);
  return fit_boosted(index, data.response, config, trace);
}

double predict_latent(const BoostedEnsemble& model, std::span<const double> x) {
  if (x.size() != model.n_features()) {
    fail(ErrorKind::kInvalidArgument, fmt::format("model expects {} features, got {}", model.n_features(), x.size()));
  }
  return model.raw_predict(x, model.trees().size());
}

std::vector<double> predict_latent(const BoostedEnsemble& model, const Matrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_latent(model, x.row(r));
  return out;
}

double predict_default_prob(const BoostedEnsemble& model, std::span<const double> x) {
  const Loss& loss = model.loss();
  if (loss.kind() != LossKind::kTobit || !loss.bounds().has_upper()) {
    fail(ErrorKind::kInvalidArgument, "default probabilities need a Tobit model with a finite upper bound");
  }
  const double f = predict_latent(model, x);
  return normal::sf((loss.bounds().upper - f) / loss.sigma());
}

std::vector<std::vector<double>> staged_predictions(const BoostedEnsemble& model, const Matrix& x,
                                                    std::span<const std::size_t> stages) {
  if (x.cols() != model.n_features() && x.rows() > 0) {
    fail(ErrorKind::kInvalidArgument, fmt::format("model expects {} features, got {}", model.n_features(), x.cols()));
  }
  for (std::size_t s : stages) require(s <= model.trees().size(), "requested stage exceeds the number of trees");
  std::vector<std::vector<double>> out(stages.size(), std::vector<double>(x.rows()));
  // Walk trees once per row, snapshotting the running sum at requested stages.
  std::vector<std::size_t> order(stages.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return stages[a] < stages[b]; });
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    double f = model.f0();
    std::size_t done = 0;
    std::size_t next = 0;
    while (next < order.size()) {
      const std::size_t target = stages[order[next]];
      for (; done < target; ++done) f += model.shrinkage() * model.trees()[done].predict(row);
      out[order[next]][r] = f;
      ++next;
    }
  }
  return out;
}

std::vector<std::vector<double>> staged_predictions(const BoostedEnsemble& model, const Matrix& x) {
  std::vector<std::size_t> stages(model.trees().size() + 1);
  for (std::size_t m = 0; m < stages.size(); ++m) stages[m] = m;
  return staged_predictions(model, x, stages);
}

double empirical_loss(const BoostedEnsemble& model, const Dataset& data) {
  double s = 0.0;
  for (std::size_t r = 0; r < data.rows(); ++r) s += model.loss().value(data.response[r], predict_latent(model, data.features.row(r)));
  return s;
}

}  // namespace grabit
