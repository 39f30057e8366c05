#include "grabit/sigma_select.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "grabit/error.hpp"
#include "grabit/evaluation.hpp"
#include "grabit/normal.hpp"

namespace grabit {
namespace {

const CensoringBounds& tobit_bounds(const BoostConfig& config) {
  require(config.loss.kind() == LossKind::kTobit, "sigma selection needs a Tobit loss");
  return config.loss.bounds();
}

BoostConfig with_sigma(const BoostConfig& config, double sigma) {
  BoostConfig c = config;
  c.loss = Loss::tobit(tobit_bounds(config), sigma);
  return c;
}

std::vector<double> sorted_grid(const SigmaSearchConfig& search) {
  search.validate();
  std::vector<double> g = search.grid;
  std::sort(g.begin(), g.end());
  return g;
}

std::vector<int> default_labels(const Dataset& data, const CensoringBounds& bounds) {
  std::vector<int> labels(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    labels[i] = censor_status(data.response[i], bounds) == CensorStatus::kUpper ? 1 : 0;
  }
  return labels;
}

bool has_both(const std::vector<int>& labels) {
  return std::find(labels.begin(), labels.end(), 1) != labels.end() &&
         std::find(labels.begin(), labels.end(), 0) != labels.end();
}

// log P(Y* >= upper); same ordering as the probability without underflow ties.
std::vector<double> log_default_scores(const BoostedEnsemble& model, const Matrix& x) {
  const double u = model.loss().bounds().upper;
  const double s = model.loss().sigma();
  std::vector<double> f = predict_latent(model, x);
  for (double& v : f) v = normal::log_sf((u - v) / s);
  return f;
}

}  // namespace

void SigmaSearchConfig::validate() const {
  require(!grid.empty(), "the sigma grid is empty");
  for (double s : grid) require(s > 0.0 && std::isfinite(s), fmt::format("sigma grid value {} is not positive", s));
  std::vector<double> g = grid;
  std::sort(g.begin(), g.end());
  require(std::adjacent_find(g.begin(), g.end()) == g.end(), "sigma grid values must be distinct");
  require(refine_tolerance > 0.0, "refine tolerance must be positive");
}

double profile_loglik(double sigma, const Dataset& data, const BoostConfig& config) {
  require(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
  const BoostConfig c = with_sigma(config, sigma);
  FitTrace trace;
  fit_boosted(data, c, &trace);
  return -trace.training_loss.back();
}

SigmaSelection select_sigma(const Dataset& data, const BoostConfig& config, const SigmaSearchConfig& search) {
  const std::vector<double> grid = sorted_grid(search);
  tobit_bounds(config);

  SigmaSelection out;
  std::size_t best = grid.size();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double l = profile_loglik(grid[k], data, config);
    out.trace.push_back({grid[k], l});
    if (std::isfinite(l) && (best == grid.size() || l > out.trace[best].loglik)) best = k;
  }
  if (best == grid.size()) fail(ErrorKind::kNumerical, "profile likelihood is non-finite at every grid point");
  out.sigma = grid[best];
  out.loglik = out.trace[best].loglik;
  if (!search.refine || grid.size() < 2) return out;

  double a = std::log(grid[best == 0 ? 0 : best - 1]);
  double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
  auto eval = [&](double phi) {
    const double s = std::exp(phi);
    const double l = profile_loglik(s, data, config);
    out.trace.push_back({s, l});
    if (std::isfinite(l) && l > out.loglik) {
      out.loglik = l;
      out.sigma = s;
    }
    return std::isfinite(l) ? l : -kInf;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double lc = eval(c);
  double ld = eval(d);
  while (b - a > search.refine_tolerance) {
    if (lc >= ld) {
      b = d;
      d = c;
      ld = lc;
      c = b - inv_phi * (b - a);
      lc = eval(c);
    } else {
      a = c;
      c = d;
      lc = ld;
      d = a + inv_phi * (b - a);
      ld = eval(d);
    }
  }
  return out;
}

SigmaCvResult select_sigma_cv(const Dataset& data, const BoostConfig& config, const SigmaSearchConfig& search,
                              const SigmaCvProtocol& protocol) {
  const std::vector<double> grid = sorted_grid(search);
  const CensoringBounds& bounds = tobit_bounds(config);
  require(bounds.has_upper(), "cross-validated sigma selection needs a finite upper bound");
  data.validate();

  struct Fold {
    Dataset train;
    Dataset valid;
    std::vector<int> labels;
  };
  std::vector<Fold> folds;
  if (protocol.validation != nullptr) {
    folds.push_back({data, *protocol.validation, default_labels(*protocol.validation, bounds)});
  } else {
    require(protocol.folds >= 2 && protocol.folds <= data.rows(), "k-fold needs 2 <= folds <= rows");
    for (std::size_t k = 0; k < protocol.folds; ++k) {
      std::vector<std::size_t> tr, va;
      for (std::size_t i = 0; i < data.rows(); ++i) (i % protocol.folds == k ? va : tr).push_back(i);
      Dataset valid = data.select_rows(va);
      std::vector<int> labels = default_labels(valid, bounds);
      folds.push_back({data.select_rows(tr), std::move(valid), std::move(labels)});
    }
  }

  SigmaCvResult out;
  out.grid = grid;
  out.mean_auroc.assign(grid.size(), 0.0);
  std::size_t usable = 0;
  for (const Fold& f : folds) {
    if (!has_both(f.labels)) {
      ++out.degenerate_folds;
      continue;
    }
    ++usable;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const BoostedEnsemble model = fit_boosted(f.train, with_sigma(config, grid[k]));
      out.mean_auroc[k] += roc_auroc(log_default_scores(model, f.valid.features), f.labels).auroc;
    }
  }
  if (usable == 0) {
    fail(ErrorKind::kInvalidArgument, "every validation fold has a single class; AUROC is undefined");
  }
  std::size_t best = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.mean_auroc[k] /= static_cast<double>(usable);
    if (out.mean_auroc[k] > out.mean_auroc[best]) best = k;
  }
  out.sigma = grid[best];
  return out;
}

}  // namespace grabit
