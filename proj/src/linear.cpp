#include "grabit/linear.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fmt/format.h>

#include "grabit/error.hpp"
#include "grabit/normal.hpp"
#include "grabit/stats.hpp"

namespace grabit {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Centered and scaled copy of the non-constant feature columns, with a
// leading column of ones.
struct Standardized {
  MatrixXd design;
  std::vector<std::size_t> kept;
  std::vector<double> center;
  std::vector<double> scale;

  explicit Standardized(const Matrix& x) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const auto col = x.column(c);
      const double m = stats::mean(col);
      double ss = 0.0;
      for (double v : col) ss += (v - m) * (v - m);
      const double s = std::sqrt(ss / static_cast<double>(col.size()));
      if (s > 0.0) {
        kept.push_back(c);
        center.push_back(m);
        scale.push_back(s);
      }
    }
    design.resize(static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(kept.size() + 1));
    for (std::size_t r = 0; r < x.rows(); ++r) {
      design(static_cast<Eigen::Index>(r), 0) = 1.0;
      for (std::size_t k = 0; k < kept.size(); ++k) {
        design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k + 1)) = (x(r, kept[k]) - center[k]) / scale[k];
      }
    }
  }

  // Maps (b0, beta_std) back to the original feature scale.
  void unscale(const VectorXd& theta, std::size_t p, LinearModel& out) const {
    out.coefficients.assign(p, 0.0);
    out.intercept = theta(0);
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const double b = theta(static_cast<Eigen::Index>(k + 1)) / scale[k];
      out.coefficients[kept[k]] = b;
      out.intercept -= b * center[k];
    }
  }
};

void check_features(const Dataset& data) {
  data.validate();
  require(data.rows() > 0, "cannot fit a linear model on an empty dataset");
  for (double v : data.features.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::kNumerical, "features must be finite; impute missing values first");
  }
}

double logit_objective(const MatrixXd& X, const VectorXd& y, const VectorXd& theta) {
  const VectorXd eta = X * theta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) s += bernoulli_logit(y(i), eta(i)).loss;
  return s / static_cast<double>(eta.size());
}

}  // namespace

std::string to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kConverged:
      return "converged";
    case FitStatus::kMaxIterations:
      return "max_iterations";
    case FitStatus::kSeparation:
      return "separation";
  }
  return "unknown";
}

LinearModel fit_logit(const Dataset& data, const LinearFitOptions& options) {
  check_features(data);
  Loss::bernoulli_logit().validate_responses(data.response);
  const bool has_pos = std::find(data.response.begin(), data.response.end(), 1.0) != data.response.end();
  const bool has_neg = std::find(data.response.begin(), data.response.end(), 0.0) != data.response.end();
  if (!has_pos || !has_neg) fail(ErrorKind::kInvalidArgument, "logistic regression needs both classes present");

  const Standardized st(data.features);
  const MatrixXd& X = st.design;
  const auto n = X.rows();
  const auto k = X.cols();
  const VectorXd y = Eigen::Map<const VectorXd>(data.response.data(), n);

  VectorXd theta = VectorXd::Zero(k);
  const double pbar = y.mean();
  theta(0) = std::log(pbar / (1.0 - pbar));

  LinearModel model;
  model.kind = LossKind::kBernoulliLogit;
  model.status = FitStatus::kMaxIterations;
  double obj = logit_objective(X, y, theta);
  VectorXd grad(k);
  for (int it = 0;; ++it) {
    const VectorXd eta = X * theta;
    VectorXd w(n), resid(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto lgh = bernoulli_logit(y(i), eta(i));
      resid(i) = lgh.gradient;
      w(i) = lgh.hessian;
    }
    grad = X.transpose() * resid / static_cast<double>(n);
    model.iterations = it;
    if (grad.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
      model.status = FitStatus::kConverged;
      break;
    }
    if (it >= options.max_iterations) break;

    const MatrixXd H = X.transpose() * w.asDiagonal() * X / static_cast<double>(n);
    Eigen::LDLT<MatrixXd> ldlt(H);
    VectorXd step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      const MatrixXd ridge = H + 1e-10 * MatrixXd::Identity(k, k);
      step = ridge.ldlt().solve(-grad);
    }
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h < 50; ++h, t *= 0.5) {
      const VectorXd cand = theta + t * step;
      const double c = logit_objective(X, y, cand);
      if (std::isfinite(c) && c <= obj) {
        theta = cand;
        obj = c;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  // Complete separation: every positive outscores every negative.
  const VectorXd eta = X * theta;
  double min_pos = kInf, max_neg = -kInf;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) == 1.0) min_pos = std::min(min_pos, eta(i));
    else max_neg = std::max(max_neg, eta(i));
  }
  if (min_pos > max_neg) model.status = FitStatus::kSeparation;

  st.unscale(theta, data.cols(), model);
  model.mean_loss = obj;
  model.gradient_norm = grad.cwiseAbs().maxCoeff();
  return model;
}

LinearModel fit_linear_tobit(const Dataset& data, const CensoringBounds& bounds, const LinearFitOptions& options) {
  check_features(data);
  const CensoringBounds b = CensoringBounds::make(bounds.lower, bounds.upper);
  std::size_t interior = 0;
  for (double v : data.response) {
    if (censor_status(v, b) == CensorStatus::kInterior) ++interior;
  }
  if (interior == 0) fail(ErrorKind::kInvalidArgument, "linear Tobit needs at least one uncensored response");

  const Standardized st(data.features);
  const MatrixXd& X = st.design;
  const auto n = X.rows();
  const auto k = X.cols();
  const VectorXd y = Eigen::Map<const VectorXd>(data.response.data(), n);
  const double dn = static_cast<double>(n);

  // theta = (b0, beta_std..., log sigma)
  auto objective = [&](const VectorXd& theta, VectorXd* grad) {
    const VectorXd coef = theta.head(k);
    const double sigma = std::exp(theta(k));
    const VectorXd f = X * coef;
    double total = 0.0;
    VectorXd df(n);
    double dphi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      total += tobit_loss(y(i), f(i), sigma, b);
      if (grad) {
        df(i) = tobit_gradient(y(i), f(i), sigma, b);
        dphi += tobit_dloss_dlogsigma(y(i), f(i), sigma, b);
      }
    }
    if (grad) {
      grad->resize(k + 1);
      grad->head(k) = X.transpose() * df / dn;
      (*grad)(k) = dphi / dn;
    }
    return total / dn;
  };

  // Start from least squares on the observed responses.
  VectorXd theta(k + 1);
  {
    const VectorXd coef = X.colPivHouseholderQr().solve(y);
    const VectorXd r = y - X * coef;
    const double rms = std::sqrt(r.squaredNorm() / dn);
    theta.head(k) = coef;
    theta(k) = std::log(rms > 0.0 ? rms : 1.0);
  }

  LinearModel model;
  model.kind = LossKind::kTobit;
  model.bounds = b;
  model.status = FitStatus::kMaxIterations;

  VectorXd g;
  double obj = objective(theta, &g);
  MatrixXd Hinv = MatrixXd::Identity(k + 1, k + 1);
  for (int it = 0;; ++it) {
    model.iterations = it;
    if (g.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
      model.status = FitStatus::kConverged;
      break;
    }
    if (it >= options.max_iterations) break;

    VectorXd dir = -Hinv * g;
    if (dir.dot(g) >= 0.0) {
      Hinv.setIdentity();
      dir = -g;
    }
    // Backtracking with the Armijo condition.
    double t = 1.0;
    VectorXd cand, gc;
    double c = 0.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      cand = theta + t * dir;
      c = objective(cand, &gc);
      if (!std::isfinite(c) || !gc.allFinite()) continue;
      // Near the optimum the decrease drops below rounding; a step that keeps
      // the objective within rounding and shrinks the gradient is accepted.
      const bool armijo = c <= obj + 1e-4 * t * g.dot(dir);
      const bool flat = c <= obj + 1e-14 * std::abs(obj) && gc.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff();
      if (armijo || flat) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const VectorXd s = cand - theta;
    const VectorXd yk = gc - g;
    const double sy = s.dot(yk);
    if (sy > 1e-12 * s.norm() * yk.norm()) {
      const double rho = 1.0 / sy;
      const MatrixXd I = MatrixXd::Identity(k + 1, k + 1);
      Hinv = (I - rho * s * yk.transpose()) * Hinv * (I - rho * yk * s.transpose()) + rho * s * s.transpose();
    }
    theta = cand;
    obj = c;
    g = gc;
  }

  st.unscale(theta.head(k), data.cols(), model);
  model.sigma = std::exp(theta(k));
  model.mean_loss = obj;
  model.gradient_norm = g.cwiseAbs().maxCoeff();
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.coefficients.size()) {
    fail(ErrorKind::kInvalidArgument,
         fmt::format("model expects {} features, got {}", model.coefficients.size(), x.size()));
  }
  double f = model.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) f += model.coefficients[j] * x[j];
  return f;
}

double predict_default_prob(const LinearModel& model, std::span<const double> x) {
  const double f = predict_linear(model, x);
  if (model.kind == LossKind::kBernoulliLogit) {
    return f >= 0.0 ? 1.0 / (1.0 + std::exp(-f)) : std::exp(f) / (1.0 + std::exp(f));
  }
  if (model.kind != LossKind::kTobit || !model.bounds.has_upper()) {
    fail(ErrorKind::kInvalidArgument, "default probabilities need a logit model or a Tobit model with an upper bound");
  }
  return normal::sf((model.bounds.upper - f) / model.sigma);
}

}  // namespace grabit
