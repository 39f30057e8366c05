#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "grabit/boosting.hpp"
#include "grabit/dataset.hpp"

namespace grabit {

/// Importance of variable l: the split gains of nodes splitting on l, summed
/// per tree and averaged over the M trees.
struct ImportanceReport {
  std::vector<double> scores;       // indexed by variable
  std::vector<std::size_t> ranked;  // variables by descending score, ties by index
};

ImportanceReport variable_importance(const BoostedEnsemble& model, std::size_t p);

/// Average prediction with the variables in `vars` overridden by grid values.
/// For two variables `values` is row-major with the first variable outer.
struct PartialDependence {
  std::vector<std::size_t> vars;
  std::vector<std::vector<double>> axes;  // one equally spaced grid per variable, [min, max] of the data
  std::vector<double> values;
};

PartialDependence partial_dependence(const BoostedEnsemble& model, const Matrix& data,
                                     std::span<const std::size_t> vars, std::size_t grid_size = 50);

struct FeatureSummary {
  double min = 0.0;
  double max = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double sd = 0.0;
};

std::vector<FeatureSummary> summarize_features(const Matrix& data);

/// Interval borders for the swept variable: (i) data range, (ii) 2.5% / 97.5%
/// quantiles, (iii) x'_s -/+ sd, (iv) x'_s -/+ delta_s.
enum class IntervalStrategy { kRange, kWinsorized, kSd, kDelta };

std::string to_string(IntervalStrategy s);
/// Accepts "i", "ii", "iii", "iv" and the names range, winsorized, sd, delta.
IntervalStrategy interval_strategy_from_string(const std::string& s);

struct LocalOptions {
  IntervalStrategy strategy = IntervalStrategy::kRange;
  std::size_t grid_size = 100;
  std::vector<double> delta;  // per variable, strategy (iv) only
};

struct Interval {
  double lo;
  double hi;
};

Interval local_interval(const FeatureSummary& summary, double x_s, std::size_t var, const LocalOptions& options);

/// F(X_s, x'_{-s}) over an equally spaced grid on the interval, with x'_s
/// itself inserted; values[marker] == F(x') exactly.
struct LocalCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::size_t marker = 0;
  double prediction = 0.0;
};

/// Throws on a zero-width interval.
LocalCurve local_partial_dependence(const BoostedEnsemble& model, std::span<const FeatureSummary> summaries,
                                    std::span<const double> x_prime, std::size_t var, const LocalOptions& options);

/// Spread of each variable's local curve: max - min, or the 97.5% minus the
/// 2.5% quantile when `winsorize` is set. Zero-width intervals score 0.
std::vector<double> local_importance(const BoostedEnsemble& model, std::span<const FeatureSummary> summaries,
                                     std::span<const double> x_prime, const LocalOptions& options, bool winsorize);

}  // namespace grabit
