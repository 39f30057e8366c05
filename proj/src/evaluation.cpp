#include "grabit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "grabit/error.hpp"
#include "grabit/stats.hpp"

namespace grabit {
namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts count_classes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorKind::kInvalidArgument, fmt::format("{} scores for {} labels", scores.size(), labels.size()));
  }
  ClassCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) ++c.pos;
    else if (labels[i] == 0) ++c.neg;
    else fail(ErrorKind::kInvalidArgument, fmt::format("label {} is not 0 or 1", labels[i]));
    if (std::isnan(scores[i])) fail(ErrorKind::kNumerical, "scores must not be NaN");
  }
  if (c.pos == 0 || c.neg == 0) fail(ErrorKind::kInvalidArgument, "ROC analysis needs both classes present");
  return c;
}

// 1-based midranks of x (ties share the average rank).
std::vector<double> midranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2) return 0.0;
  const double ma = stats::mean(a);
  const double mb = stats::mean(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

}  // namespace

RocCurve roc_auroc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = count_classes(scores, labels);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (labels[order[i]] == 1) ++tp;
      else ++fp;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(c.neg),
                            static_cast<double>(tp) / static_cast<double>(c.pos)});
  }

  const auto rank = midranks(scores);
  double rank_sum = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == 1) rank_sum += rank[k];
  }
  const double p = static_cast<double>(c.pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  curve.auroc = u / (p * static_cast<double>(c.neg));
  return curve;
}

double trapezoid_area(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  return area;
}

DelongComponents delong_components(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = count_classes(scores, labels);
  std::vector<double> pos, neg;
  pos.reserve(c.pos);
  neg.reserve(c.neg);
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(scores[i]);

  const auto r_all = midranks(scores);
  const auto r_pos = midranks(pos);
  const auto r_neg = midranks(neg);
  const double np = static_cast<double>(c.pos);
  const double nn = static_cast<double>(c.neg);

  DelongComponents out;
  out.v10.reserve(c.pos);
  out.v01.reserve(c.neg);
  std::size_t ip = 0, in = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) out.v10.push_back((r_all[i] - r_pos[ip++]) / nn);
    else out.v01.push_back(1.0 - (r_all[i] - r_neg[in++]) / np);
  }
  out.auroc = stats::mean(out.v10);
  return out;
}

DelongResult delong_test(std::span<const double> scores_a, std::span<const double> scores_b,
                         std::span<const int> labels) {
  if (scores_a.size() != scores_b.size()) fail(ErrorKind::kInvalidArgument, "paired score vectors differ in length");
  const auto a = delong_components(scores_a, labels);
  const auto b = delong_components(scores_b, labels);
  const double np = static_cast<double>(a.v10.size());
  const double nn = static_cast<double>(a.v01.size());

  const double s10 = covariance(a.v10, a.v10) + covariance(b.v10, b.v10) - 2.0 * covariance(a.v10, b.v10);
  const double s01 = covariance(a.v01, a.v01) + covariance(b.v01, b.v01) - 2.0 * covariance(a.v01, b.v01);

  DelongResult r;
  r.auroc_a = roc_auroc(scores_a, labels).auroc;
  r.auroc_b = roc_auroc(scores_b, labels).auroc;
  r.variance = std::max(s10 / np + s01 / nn, 1e-300);
  r.z = (r.auroc_a - r.auroc_b) / std::sqrt(r.variance);
  r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  return r;
}

double interpolate_tpr(const RocCurve& curve, double fpr) {
  const auto& pts = curve.points;
  require(!pts.empty(), "cannot interpolate an empty ROC curve");
  // Last point with FPR <= fpr; this is the top of any vertical segment.
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].fpr <= fpr) k = i;
    else break;
  }
  if (pts[k].fpr == fpr || k + 1 == pts.size()) return pts[k].tpr;
  const auto& a = pts[k];
  const auto& b = pts[k + 1];
  return a.tpr + (fpr - a.fpr) / (b.fpr - a.fpr) * (b.tpr - a.tpr);
}

RocBand aggregate_roc(std::span<const RocCurve> curves) {
  require(!curves.empty(), "aggregate_roc needs at least one curve");
  RocBand band;
  band.n_curves = curves.size();
  band.grid.resize(kRocGridPoints);
  for (std::size_t g = 0; g < kRocGridPoints; ++g) {
    band.grid[g] = static_cast<double>(g) / static_cast<double>(kRocGridPoints - 1);
  }

  std::vector<std::vector<double>> tpr(kRocGridPoints, std::vector<double>(curves.size()));
  for (std::size_t c = 0; c < curves.size(); ++c) {
    RocCurve anchored = curves[c];
    if (anchored.points.empty() || anchored.points.front().fpr != 0.0 || anchored.points.front().tpr != 0.0) {
      anchored.points.insert(anchored.points.begin(), {0.0, 0.0});
    }
    if (anchored.points.back().fpr != 1.0 || anchored.points.back().tpr != 1.0) anchored.points.push_back({1.0, 1.0});
    for (std::size_t g = 0; g < kRocGridPoints; ++g) tpr[g][c] = interpolate_tpr(anchored, band.grid[g]);
  }

  auto clip = [](double v) { return std::clamp(v, 0.0, 1.0); };
  for (std::size_t g = 0; g < kRocGridPoints; ++g) {
    band.mean_tpr.push_back(clip(stats::mean(tpr[g])));
    band.lower_tpr.push_back(clip(std::min(stats::quantile(tpr[g], 0.025), band.mean_tpr.back())));
    band.upper_tpr.push_back(clip(std::max(stats::quantile(tpr[g], 0.975), band.mean_tpr.back())));
  }

  std::vector<double> aucs;
  for (const auto& c : curves) aucs.push_back(c.auroc);
  band.mean_auroc = stats::mean(aucs);
  band.auroc_lower = stats::quantile(aucs, 0.025);
  band.auroc_upper = stats::quantile(aucs, 0.975);
  return band;
}

TemporalCvResult temporal_cv(const Dataset& data, std::span<const int> labels, const ModelFactory& factory,
                             const TemporalCvConfig& config) {
  data.validate();
  require(config.min_train_size >= 1, "min_train_size must be >= 1");
  require(config.maturity_lag >= 0.0, "maturity lag must be non-negative");
  if (data.timestamps.size() != data.rows()) fail(ErrorKind::kSchema, "temporal cross-validation needs timestamps");
  if (labels.size() != data.rows()) fail(ErrorKind::kInvalidArgument, "labels do not match the dataset rows");

  const std::size_t n = data.rows();
  const std::size_t p = data.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.timestamps[a] < data.timestamps[b]; });

  struct Scored {
    std::size_t row;
    double score;
  };
  std::vector<Scored> scored;

  std::size_t earlier = 0;  // rows strictly earlier in time form a prefix of `order`
  std::size_t mature = 0;   // rows that are also matured form a (shorter) prefix
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t row = order[pos];
    const double t = data.timestamps[row];
    while (earlier < n && data.timestamps[order[earlier]] < t) ++earlier;
    while (mature < earlier && data.timestamps[order[mature]] + config.maturity_lag <= t) ++mature;
    if (mature < config.min_train_size) continue;

    std::vector<double> fill(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
      std::vector<double> seen;
      for (std::size_t k = 0; k < earlier; ++k) {
        const double v = data.features(order[k], c);
        if (!std::isnan(v)) seen.push_back(v);
      }
      if (!seen.empty()) fill[c] = stats::lower_median(std::move(seen));
    }
    auto impute = [&](std::span<double> x) {
      for (std::size_t c = 0; c < p; ++c) {
        if (std::isnan(x[c])) x[c] = fill[c];
      }
    };

    Dataset train = data.select_rows(std::span<const std::size_t>(order.data(), mature));
    for (std::size_t r = 0; r < train.rows(); ++r) impute(train.features.row(r));
    std::vector<double> x(data.features.row(row).begin(), data.features.row(row).end());
    impute(x);

    const Scorer scorer = factory(train);
    scored.push_back({row, scorer(x)});
  }

  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.row < b.row; });
  TemporalCvResult result;
  result.empty = scored.empty();
  for (const auto& s : scored) {
    result.rows.push_back(s.row);
    result.scores.push_back(s.score);
    result.labels.push_back(labels[s.row]);
  }
  const bool has_pos = std::find(result.labels.begin(), result.labels.end(), 1) != result.labels.end();
  const bool has_neg = std::find(result.labels.begin(), result.labels.end(), 0) != result.labels.end();
  if (has_pos && has_neg) result.roc = roc_auroc(result.scores, result.labels);
  return result;
}

}  // namespace grabit
