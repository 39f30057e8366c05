#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grabit/dataset.hpp"
#include "grabit/loss.hpp"
#include "grabit/tree.hpp"

namespace grabit {

struct BoostConfig {
  int n_trees = 100;
  double shrinkage = 0.1;
  TreeConfig tree;
  Loss loss = Loss::squared();
  // Per-observation Hessians are clamped from below before the Newton step.
  double hessian_floor = 1e-12;

  void validate() const;
};

/// F(x) = f0 + sum_m shrinkage * tree_m(x), accumulated tree by tree in
/// order. Training uses the same accumulation, so in-sample predictions and
/// predict_latent agree bit for bit.
class BoostedEnsemble {
 public:
  BoostedEnsemble(Loss loss, double f0, double shrinkage, std::vector<RegressionTree> trees, std::size_t n_features);

  const Loss& loss() const { return loss_; }
  double f0() const { return f0_; }
  double shrinkage() const { return shrinkage_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  std::size_t n_features() const { return n_features_; }

  /// Unchecked F(x) using the first `stages` trees.
  double raw_predict(std::span<const double> x, std::size_t stages) const;

  /// The ensemble made of the first m trees.
  BoostedEnsemble truncated(std::size_t m) const;

 private:
  Loss loss_;
  double f0_;
  double shrinkage_;
  std::vector<RegressionTree> trees_;
  std::size_t n_features_;
};

/// Per-stage training loss, sum_i L(y_i, F^[m](x_i)) for m = 0..M.
struct FitTrace {
  std::vector<double> training_loss;
};

/// Functional gradient descent with least-squares trees on the
/// pseudoresponses and Newton leaf values.
BoostedEnsemble fit_boosted(const Dataset& data, const BoostConfig& config, FitTrace* trace = nullptr);
BoostedEnsemble fit_boosted(const FeatureIndex& index, std::span<const double> response, const BoostConfig& config,
                            FitTrace* trace = nullptr);

double predict_latent(const BoostedEnsemble& model, std::span<const double> x);
std::vector<double> predict_latent(const BoostedEnsemble& model, const Matrix& x);

/// 1 - Phi((upper - F(x)) / sigma). Requires a Tobit model with a finite
/// upper bound.
double predict_default_prob(const BoostedEnsemble& model, std::span<const double> x);

/// Prediction vectors after 0, 1, ..., M trees.
std::vector<std::vector<double>> staged_predictions(const BoostedEnsemble& model, const Matrix& x);

/// Prediction vectors for the requested stage counts only (each <= M).
std::vector<std::vector<double>> staged_predictions(const BoostedEnsemble& model, const Matrix& x,
                                                    std::span<const std::size_t> stages);

/// Sum of the model loss over a dataset.
double empirical_loss(const BoostedEnsemble& model, const Dataset& data);

}  // namespace grabit
