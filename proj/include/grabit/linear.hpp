#pragma once

#include <span>
#include <string>
#include <vector>

#include "grabit/dataset.hpp"
#include "grabit/loss.hpp"

namespace grabit {

enum class FitStatus {
  kConverged,
  kMaxIterations,
  kSeparation,  // classes perfectly separated by the fitted score; no finite MLE
};

std::string to_string(FitStatus status);

/// F(x) = intercept + coefficients . x. For Tobit models sigma and bounds
/// describe the latent scale and the censoring interval.
struct LinearModel {
  LossKind kind = LossKind::kBernoulliLogit;
  double intercept = 0.0;
  std::vector<double> coefficients;
  double sigma = 1.0;
  CensoringBounds bounds;

  FitStatus status = FitStatus::kConverged;
  int iterations = 0;
  double mean_loss = 0.0;
  double gradient_norm = 0.0;  // max-norm of the mean-loss gradient at exit
};

struct LinearFitOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
};

/// Maximum-likelihood logistic regression by Newton iterations with step
/// halving. Requires a 0/1 response with both classes present.
LinearModel fit_logit(const Dataset& data, const LinearFitOptions& options = {});

/// Linear Tobit model: minimizes the summed Tobit loss jointly over the
/// intercept, coefficients and log(sigma) by BFGS with backtracking.
/// Requires at least one interior response.
LinearModel fit_linear_tobit(const Dataset& data, const CensoringBounds& bounds,
                             const LinearFitOptions& options = {.max_iterations = 500});

double predict_linear(const LinearModel& model, std::span<const double> x);

/// Logistic probability for logit models; 1 - Phi((upper - F)/sigma) for
/// Tobit models with a finite upper bound.
double predict_default_prob(const LinearModel& model, std::span<const double> x);

}  // namespace grabit
