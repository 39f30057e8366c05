#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "grabit/dataset.hpp"

namespace grabit {

struct RocPoint {
  double fpr;
  double tpr;
};

/// Empirical ROC curve from (0,0) to (1,1); tied scores form one step.
struct RocCurve {
  std::vector<RocPoint> points;
  double auroc = 0.5;
};

/// Descending-threshold ROC sweep. The AUROC is the Mann-Whitney statistic
/// with ties counted one half. Throws unless both classes are present.
RocCurve roc_auroc(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under a curve's points.
double trapezoid_area(const RocCurve& curve);

/// DeLong structural components of one score vector: one placement value per
/// positive (v10) and per negative (v01), in input order within each class.
struct DelongComponents {
  std::vector<double> v10;
  std::vector<double> v01;
  double auroc = 0.5;
};

DelongComponents delong_components(std::span<const double> scores, std::span<const int> labels);

struct DelongResult {
  double auroc_a = 0.5;
  double auroc_b = 0.5;
  double variance = 0.0;  // variance of auroc_a - auroc_b, floored
  double z = 0.0;
  double p_value = 1.0;
};

/// Two-sided test of equal AUROC for two paired score vectors on the same
/// labels.
DelongResult delong_test(std::span<const double> scores_a, std::span<const double> scores_b,
                         std::span<const int> labels);

/// Pointwise summary of many ROC curves on a common FPR grid.
struct RocBand {
  std::vector<double> grid;
  std::vector<double> mean_tpr;
  std::vector<double> lower_tpr;
  std::vector<double> upper_tpr;
  double mean_auroc = 0.5;
  double auroc_lower = 0.5;
  double auroc_upper = 0.5;
  std::size_t n_curves = 0;
};

inline constexpr std::size_t kRocGridPoints = 100;

/// TPR of the curve at a given FPR by linear interpolation between its
/// points; on a vertical segment the top of the segment is used.
double interpolate_tpr(const RocCurve& curve, double fpr);

/// Interpolates every curve onto 100 equally spaced FPR values in [0, 1],
/// then takes pointwise means and 2.5% / 97.5% quantiles (clipped to
/// [0, 1]). AUROC statistics come from the per-curve AUROCs.
RocBand aggregate_roc(std::span<const RocCurve> curves);

struct TemporalCvConfig {
  std::size_t min_train_size = 100;
  double maturity_lag = 61.0;  // in timestamp units (days)
};

using Scorer = std::function<double(std::span<const double>)>;
using ModelFactory = std::function<Scorer(const Dataset& train)>;

struct TemporalCvResult {
  // Scored rows in ascending row order, with their scores and labels.
  std::vector<std::size_t> rows;
  std::vector<double> scores;
  std::vector<int> labels;
  std::optional<RocCurve> roc;  // absent when nothing was scored or one class only
  bool empty = true;            // no row had enough mature history
};

/// Walk-forward evaluation: each row is scored by a model trained on rows
/// with strictly earlier timestamps whose timestamp + maturity_lag does not
/// exceed the row's timestamp. Missing features (NaN) are filled with the
/// lower median of the column over all rows strictly earlier in time.
TemporalCvResult temporal_cv(const Dataset& data, std::span<const int> labels, const ModelFactory& factory,
                             const TemporalCvConfig& config = {});

}  // namespace grabit
