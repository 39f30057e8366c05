#include "grabit/loss.hpp"

#include <cmath>
#include <fmt/format.h>

#include "grabit/error.hpp"
#include "grabit/normal.hpp"

namespace grabit {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kSnapRelTol = 1e-9;

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(ErrorKind::kInvalidArgument, fmt::format("sigma must be positive and finite, got {}", sigma));
  }
}

}  // namespace

CensoringBounds CensoringBounds::make(double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper)) fail(ErrorKind::kInvalidArgument, "censoring bounds must not be NaN");
  if (!(lower < upper)) {
    fail(ErrorKind::kInvalidArgument, fmt::format("lower bound {} must be below upper bound {}", lower, upper));
  }
  if (lower == kInf || upper == -kInf) fail(ErrorKind::kInvalidArgument, "censoring bounds point the wrong way");
  return {lower, upper};
}

double CensoringBounds::snap_tolerance() const {
  if (has_lower() && has_upper()) return kSnapRelTol * (upper - lower);
  if (has_lower()) return kSnapRelTol * std::max(1.0, std::abs(lower));
  if (has_upper()) return kSnapRelTol * std::max(1.0, std::abs(upper));
  return 0.0;
}

CensorStatus censor_status(double y, const CensoringBounds& bounds) {
  if (y == bounds.lower) return CensorStatus::kLower;
  if (y == bounds.upper) return CensorStatus::kUpper;
  if (y > bounds.lower && y < bounds.upper) return CensorStatus::kInterior;
  fail(ErrorKind::kBounds,
       fmt::format("response {} outside censoring interval [{}, {}]", y, bounds.lower, bounds.upper));
}

std::size_t snap_to_bounds(std::span<double> y, const CensoringBounds& bounds) {
  const double tol = bounds.snap_tolerance();
  std::size_t snapped = 0;
  for (double& v : y) {
    if (bounds.has_lower() && v != bounds.lower && std::abs(v - bounds.lower) <= tol) {
      v = bounds.lower;
      ++snapped;
    } else if (bounds.has_upper() && v != bounds.upper && std::abs(v - bounds.upper) <= tol) {
      v = bounds.upper;
      ++snapped;
    }
  }
  return snapped;
}

double tobit_density(double y, double f, double sigma, const CensoringBounds& bounds) {
  check_sigma(sigma);
  switch (censor_status(y, bounds)) {
    case CensorStatus::kLower:
      return normal::cdf((bounds.lower - f) / sigma);
    case CensorStatus::kUpper:
      return normal::sf((bounds.upper - f) / sigma);
    case CensorStatus::kInterior:
      break;
  }
  return normal::pdf((y - f) / sigma) / sigma;
}

double tobit_loss(double y, double f, double sigma, const CensoringBounds& bounds) {
  check_sigma(sigma);
  switch (censor_status(y, bounds)) {
    case CensorStatus::kLower:
      return -normal::log_cdf((bounds.lower - f) / sigma);
    case CensorStatus::kUpper:
      return -normal::log_sf((bounds.upper - f) / sigma);
    case CensorStatus::kInterior:
      break;
  }
  const double r = y - f;
  return r * r / (2.0 * sigma * sigma) + std::log(sigma) + kHalfLog2Pi;
}

double tobit_gradient(double y, double f, double sigma, const CensoringBounds& bounds) {
  check_sigma(sigma);
  switch (censor_status(y, bounds)) {
    case CensorStatus::kLower:
      return normal::lower_hazard((bounds.lower - f) / sigma) / sigma;
    case CensorStatus::kUpper:
      return -normal::upper_hazard((bounds.upper - f) / sigma) / sigma;
    case CensorStatus::kInterior:
      break;
  }
  return -(y - f) / (sigma * sigma);
}

double tobit_hessian(double y, double f, double sigma, const CensoringBounds& bounds) {
  check_sigma(sigma);
  const double s2 = sigma * sigma;
  switch (censor_status(y, bounds)) {
    case CensorStatus::kLower: {
      // phi/Phi * (z + phi/Phi) with z = (lower - f)/sigma; mirror of the upper tail.
      const double z = (bounds.lower - f) / sigma;
      return normal::lower_hazard(z) * normal::upper_hazard_minus_z(-z) / s2;
    }
    case CensorStatus::kUpper: {
      const double z = (bounds.upper - f) / sigma;
      return normal::upper_hazard(z) * normal::upper_hazard_minus_z(z) / s2;
    }
    case CensorStatus::kInterior:
      break;
  }
  return 1.0 / s2;
}

double tobit_dloss_dlogsigma(double y, double f, double sigma, const CensoringBounds& bounds) {
  check_sigma(sigma);
  switch (censor_status(y, bounds)) {
    case CensorStatus::kLower: {
      const double z = (bounds.lower - f) / sigma;
      return z * normal::lower_hazard(z);
    }
    case CensorStatus::kUpper: {
      const double z = (bounds.upper - f) / sigma;
      return -z * normal::upper_hazard(z);
    }
    case CensorStatus::kInterior:
      break;
  }
  const double r = (y - f) / sigma;
  return 1.0 - r * r;
}

LossGradHess bernoulli_logit(double y, double f) {
  if (y != 0.0 && y != 1.0) fail(ErrorKind::kBounds, fmt::format("Bernoulli response must be 0 or 1, got {}", y));
  // log(1 + e^f) and p = 1/(1 + e^-f) without overflow in either direction.
  auto softplus = [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
  const double e = std::exp(-std::abs(f));
  const double p = f >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  const double q = f >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
  const double loss = y == 1.0 ? softplus(-f) : softplus(f);
  const double grad = y == 1.0 ? -q : p;
  return {loss, grad, p * q};
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kTobit:
      return "tobit";
    case LossKind::kBernoulliLogit:
      return "bernoulli_logit";
    case LossKind::kSquared:
      return "squared";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "tobit") return LossKind::kTobit;
  if (name == "bernoulli_logit") return LossKind::kBernoulliLogit;
  if (name == "squared") return LossKind::kSquared;
  fail(ErrorKind::kSchema, fmt::format("unknown loss '{}'", name));
}

Loss Loss::tobit(const CensoringBounds& bounds, double sigma) {
  check_sigma(sigma);
  return Loss(LossKind::kTobit, CensoringBounds::make(bounds.lower, bounds.upper), sigma);
}

Loss Loss::bernoulli_logit() { return Loss(LossKind::kBernoulliLogit, {}, 1.0); }

Loss Loss::squared() { return Loss(LossKind::kSquared, {}, 1.0); }

double Loss::value(double y, double f) const {
  switch (kind_) {
    case LossKind::kTobit:
      return tobit_loss(y, f, sigma_, bounds_);
    case LossKind::kBernoulliLogit:
      return grabit::bernoulli_logit(y, f).loss;
    case LossKind::kSquared:
      break;
  }
  return 0.5 * (y - f) * (y - f);
}

double Loss::gradient(double y, double f) const {
  switch (kind_) {
    case LossKind::kTobit:
      return tobit_gradient(y, f, sigma_, bounds_);
    case LossKind::kBernoulliLogit:
      return grabit::bernoulli_logit(y, f).gradient;
    case LossKind::kSquared:
      break;
  }
  return -(y - f);
}

double Loss::hessian(double y, double f) const {
  switch (kind_) {
    case LossKind::kTobit:
      return tobit_hessian(y, f, sigma_, bounds_);
    case LossKind::kBernoulliLogit:
      return grabit::bernoulli_logit(y, f).hessian;
    case LossKind::kSquared:
      break;
  }
  return 1.0;
}

double Loss::initial_prediction(std::span<const double> y) const {
  require(!y.empty(), "cannot initialize a model from an empty response");
  double sum = 0.0;
  for (double v : y) sum += v;
  const double mean = sum / static_cast<double>(y.size());
  if (kind_ != LossKind::kBernoulliLogit) return mean;
  if (mean <= 0.0 || mean >= 1.0) {
    fail(ErrorKind::kInvalidArgument, "Bernoulli response needs both classes to initialize the log-odds");
  }
  return std::log(mean / (1.0 - mean));
}

void Loss::validate_responses(std::span<const double> y) const {
  for (double v : y) {
    switch (kind_) {
      case LossKind::kTobit:
        censor_status(v, bounds_);
        break;
      case LossKind::kBernoulliLogit:
        if (v != 0.0 && v != 1.0) fail(ErrorKind::kBounds, fmt::format("Bernoulli response must be 0 or 1, got {}", v));
        break;
      case LossKind::kSquared:
        if (!std::isfinite(v)) fail(ErrorKind::kNumerical, "non-finite response");
        break;
    }
  }
}

}  // namespace grabit
