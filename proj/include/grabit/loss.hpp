#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

namespace grabit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Censoring interval [lower, upper] of the Tobit observation rule
/// Y = min(max(Y*, lower), upper). Either side may be infinite.
struct CensoringBounds {
  double lower = -kInf;
  double upper = kInf;

  /// Validated constructor: rejects NaN and lower >= upper.
  static CensoringBounds make(double lower, double upper);

  bool has_lower() const { return std::isfinite(lower); }
  bool has_upper() const { return std::isfinite(upper); }
  bool is_censored() const { return has_lower() || has_upper(); }

  /// Distance under which a response is snapped onto a bound. Relative to
  /// the interval width when both bounds are finite, otherwise to the
  /// magnitude of the finite bound.
  double snap_tolerance() const;

  bool operator==(const CensoringBounds&) const = default;
};

enum class CensorStatus { kLower, kInterior, kUpper };

/// Classifies y by exact equality with the bounds. Throws ErrorKind::kBounds
/// when y lies outside [lower, upper] or is NaN.
CensorStatus censor_status(double y, const CensoringBounds& bounds);

/// Moves values within bounds.snap_tolerance() of a bound onto it. Returns
/// the number of values changed.
std::size_t snap_to_bounds(std::span<double> y, const CensoringBounds& bounds);

// Tobit likelihood pieces for one observation with latent mean f. All throw
// kInvalidArgument for sigma <= 0 and kBounds for y outside the interval.
double tobit_density(double y, double f, double sigma, const CensoringBounds& bounds);
double tobit_loss(double y, double f, double sigma, const CensoringBounds& bounds);
double tobit_gradient(double y, double f, double sigma, const CensoringBounds& bounds);
double tobit_hessian(double y, double f, double sigma, const CensoringBounds& bounds);

/// Derivative of tobit_loss with respect to log(sigma) at fixed f.
double tobit_dloss_dlogsigma(double y, double f, double sigma, const CensoringBounds& bounds);

struct LossGradHess {
  double loss;
  double gradient;
  double hessian;
};

/// Bernoulli negative log-likelihood with logit link, y in {0, 1}.
LossGradHess bernoulli_logit(double y, double f);

enum class LossKind { kTobit, kBernoulliLogit, kSquared };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// A per-observation loss L(y, F) with its first two derivatives in F.
///
/// The Tobit member carries the censoring bounds and the (fixed) latent
/// scale. Squared loss is (y - F)^2 / 2.
class Loss {
 public:
  static Loss tobit(const CensoringBounds& bounds, double sigma);
  static Loss bernoulli_logit();
  static Loss squared();

  LossKind kind() const { return kind_; }
  const CensoringBounds& bounds() const { return bounds_; }
  double sigma() const { return sigma_; }

  double value(double y, double f) const;
  double gradient(double y, double f) const;
  double hessian(double y, double f) const;

  /// Constant starting prediction: mean response for Tobit and squared
  /// loss, log-odds of the mean for Bernoulli.
  double initial_prediction(std::span<const double> y) const;

  /// Throws when a response is outside the loss domain.
  void validate_responses(std::span<const double> y) const;

  bool operator==(const Loss&) const = default;

 private:
  Loss(LossKind kind, CensoringBounds bounds, double sigma)
      : kind_(kind), bounds_(bounds), sigma_(sigma) {}

  LossKind kind_;
  CensoringBounds bounds_;
  double sigma_;
};

}  // namespace grabit
