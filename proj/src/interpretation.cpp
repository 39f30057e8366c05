#include "grabit/interpretation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "grabit/error.hpp"
#include "grabit/stats.hpp"

namespace grabit {
namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n <= 1 || lo == hi) return {lo};
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  g.back() = hi;
  return g;
}

void check_width(const BoostedEnsemble& model, std::size_t width) {
  if (width != model.n_features()) {
    fail(ErrorKind::kInvalidArgument, fmt::format("model expects {} features, got {}", model.n_features(), width));
  }
}

}  // namespace

ImportanceReport variable_importance(const BoostedEnsemble& model, std::size_t p) {
  require(p == model.n_features(), fmt::format("model has {} features, not {}", model.n_features(), p));
  ImportanceReport r;
  r.scores.assign(p, 0.0);
  const auto& trees = model.trees();
  if (!trees.empty()) {
    const double m = static_cast<double>(trees.size());
    std::vector<double> per_tree(p);
    for (const auto& tree : trees) {
      std::fill(per_tree.begin(), per_tree.end(), 0.0);
      for (const auto& node : tree.nodes()) {
        if (!node.is_leaf()) per_tree[static_cast<std::size_t>(node.feature)] += node.gain;
      }
      for (std::size_t l = 0; l < p; ++l) r.scores[l] += per_tree[l] / m;
    }
  }
  r.ranked.resize(p);
  std::iota(r.ranked.begin(), r.ranked.end(), std::size_t{0});
  std::stable_sort(r.ranked.begin(), r.ranked.end(),
                   [&](std::size_t a, std::size_t b) { return r.scores[a] > r.scores[b]; });
  return r;
}

PartialDependence partial_dependence(const BoostedEnsemble& model, const Matrix& data,
                                     std::span<const std::size_t> vars, std::size_t grid_size) {
  check_width(model, data.cols());
  if (data.rows() == 0) fail(ErrorKind::kInvalidArgument, "partial dependence needs at least one data row");
  require(vars.size() == 1 || vars.size() == 2, "partial dependence takes one or two variables");
  require(grid_size >= 1, "grid size must be >= 1");
  for (std::size_t v : vars) require(v < data.cols(), fmt::format("variable index {} out of range", v));
  if (vars.size() == 2) require(vars[0] != vars[1], "partial dependence variables must differ");

  PartialDependence pd;
  pd.vars.assign(vars.begin(), vars.end());
  for (std::size_t v : vars) {
    const auto col = data.column(v);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    pd.axes.push_back(linspace(*lo, *hi, grid_size));
  }

  const std::size_t n = data.rows();
  const std::size_t stages = model.trees().size();
  std::vector<double> x(data.cols());
  auto average_at = [&](std::span<const double> point) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = data.row(i);
      std::copy(row.begin(), row.end(), x.begin());
      for (std::size_t k = 0; k < pd.vars.size(); ++k) x[pd.vars[k]] = point[k];
      s += model.raw_predict(x, stages);
    }
    return s / static_cast<double>(n);
  };

  if (pd.vars.size() == 1) {
    for (double a : pd.axes[0]) pd.values.push_back(average_at(std::array{a}));
  } else {
    for (double a : pd.axes[0]) {
      for (double b : pd.axes[1]) pd.values.push_back(average_at(std::array{a, b}));
    }
  }
  return pd;
}

std::vector<FeatureSummary> summarize_features(const Matrix& data) {
  require(data.rows() > 0, "cannot summarize an empty matrix");
  std::vector<FeatureSummary> out;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    const auto col = data.column(c);
    FeatureSummary s;
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    s.min = *lo;
    s.max = *hi;
    s.q025 = stats::quantile(col, 0.025);
    s.q975 = stats::quantile(col, 0.975);
    s.sd = col.size() > 1 ? stats::sd(col) : 0.0;
    out.push_back(s);
  }
  return out;
}

std::string to_string(IntervalStrategy s) {
  switch (s) {
    case IntervalStrategy::kRange:
      return "i";
    case IntervalStrategy::kWinsorized:
      return "ii";
    case IntervalStrategy::kSd:
      return "iii";
    case IntervalStrategy::kDelta:
      return "iv";
  }
  return "unknown";
}

IntervalStrategy interval_strategy_from_string(const std::string& s) {
  if (s == "i" || s == "range") return IntervalStrategy::kRange;
  if (s == "ii" || s == "winsorized") return IntervalStrategy::kWinsorized;
  if (s == "iii" || s == "sd") return IntervalStrategy::kSd;
  if (s == "iv" || s == "delta") return IntervalStrategy::kDelta;
  fail(ErrorKind::kInvalidArgument, fmt::format("unknown interval strategy '{}'", s));
}

Interval local_interval(const FeatureSummary& summary, double x_s, std::size_t var, const LocalOptions& options) {
  switch (options.strategy) {
    case IntervalStrategy::kRange:
      return {summary.min, summary.max};
    case IntervalStrategy::kWinsorized:
      return {summary.q025, summary.q975};
    case IntervalStrategy::kSd:
      return {x_s - summary.sd, x_s + summary.sd};
    case IntervalStrategy::kDelta: {
      require(var < options.delta.size(), fmt::format("no delta given for variable {}", var));
      const double d = options.delta[var];
      require(d > 0.0, fmt::format("delta for variable {} must be positive", var));
      return {x_s - d, x_s + d};
    }
  }
  fail(ErrorKind::kInvalidArgument, "unknown interval strategy");
}

LocalCurve local_partial_dependence(const BoostedEnsemble& model, std::span<const FeatureSummary> summaries,
                                    std::span<const double> x_prime, std::size_t var, const LocalOptions& options) {
  check_width(model, x_prime.size());
  require(summaries.size() == x_prime.size(), "feature summaries do not match the row width");
  require(var < x_prime.size(), fmt::format("variable index {} out of range", var));
  require(options.grid_size >= 2, "local grid size must be >= 2");

  const Interval iv = local_interval(summaries[var], x_prime[var], var, options);
  if (!(iv.hi > iv.lo)) {
    fail(ErrorKind::kInvalidArgument, fmt::format("interval for variable {} has zero width", var));
  }

  LocalCurve c;
  c.grid = linspace(iv.lo, iv.hi, options.grid_size);
  const auto pos = std::lower_bound(c.grid.begin(), c.grid.end(), x_prime[var]);
  c.marker = static_cast<std::size_t>(pos - c.grid.begin());
  if (pos == c.grid.end() || *pos != x_prime[var]) c.grid.insert(pos, x_prime[var]);

  const std::size_t stages = model.trees().size();
  std::vector<double> x(x_prime.begin(), x_prime.end());
  for (double g : c.grid) {
    x[var] = g;
    c.values.push_back(model.raw_predict(x, stages));
  }
  c.prediction = model.raw_predict(x_prime, stages);
  return c;
}

std::vector<double> local_importance(const BoostedEnsemble& model, std::span<const FeatureSummary> summaries,
                                     std::span<const double> x_prime, const LocalOptions& options, bool winsorize) {
  check_width(model, x_prime.size());
  std::vector<double> scores(x_prime.size(), 0.0);
  for (std::size_t s = 0; s < x_prime.size(); ++s) {
    const Interval iv = local_interval(summaries[s], x_prime[s], s, options);
    if (!(iv.hi > iv.lo)) continue;
    const LocalCurve c = local_partial_dependence(model, summaries, x_prime, s, options);
    if (winsorize) {
      scores[s] = stats::quantile(c.values, 0.975) - stats::quantile(c.values, 0.025);
    } else {
      const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
      scores[s] = *hi - *lo;
    }
  }
  return scores;
}

}  // namespace grabit
