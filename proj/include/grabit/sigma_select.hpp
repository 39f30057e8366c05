#pragma once

#include <cstddef>
#include <vector>

#include "grabit/boosting.hpp"
#include "grabit/dataset.hpp"

namespace grabit {

struct SigmaSearchConfig {
  std::vector<double> grid{0.01, 0.1, 1.0, 10.0, 100.0};
  bool refine = false;
  // Golden-section stops once the phi = log(sigma) bracket is this narrow.
  double refine_tolerance = 1e-6;

  void validate() const;
};

struct SigmaTracePoint {
  double sigma;
  double loglik;
};

struct SigmaSelection {
  double sigma = 1.0;
  double loglik = 0.0;
  std::vector<SigmaTracePoint> trace;  // grid points in ascending order, then refinement evaluations
};

/// l(sigma) = -sum_i L(y_i, F_sigma(x_i)) for the ensemble fitted with sigma
/// held fixed. `config.loss` must be a Tobit loss; its sigma is replaced.
double profile_loglik(double sigma, const Dataset& data, const BoostConfig& config);

/// Maximizes l over the grid (sorted internally; ties go to the smaller
/// sigma), then optionally refines by golden-section search on phi inside
/// the grid interval bracketing the maximum. The result is never worse than
/// the grid maximum.
SigmaSelection select_sigma(const Dataset& data, const BoostConfig& config, const SigmaSearchConfig& search = {});

/// Holdout validation when `validation` is set, otherwise k-fold with fold
/// index i % folds.
struct SigmaCvProtocol {
  const Dataset* validation = nullptr;
  std::size_t folds = 5;
};

struct SigmaCvResult {
  double sigma = 1.0;
  std::vector<double> grid;          // ascending
  std::vector<double> mean_auroc;    // per grid point, over usable folds
  std::size_t degenerate_folds = 0;  // validation folds with a single class, skipped
};

/// Picks the grid sigma whose fitted ensemble has the highest validation
/// AUROC of its default predictions; ties go to the smaller sigma. A row is a
/// default iff its response equals the upper bound. Throws when no
/// validation fold contains both classes.
SigmaCvResult select_sigma_cv(const Dataset& data, const BoostConfig& config, const SigmaSearchConfig& search = {},
                              const SigmaCvProtocol& protocol = {});

}  // namespace grabit
