#include "grabit/normal.hpp"

#include <cmath>
#include <numbers>

namespace grabit::normal {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr int kFractionDepth = 80;

// Tail of the continued fraction
//   Q(z)/phi(z) = 1/(z + 1/(z + 2/(z + 3/(z + ...))))
// returns t0 and t1 with ratio = 1/t0 and t0 = z + 1/t1. Only used for z > 8,
// where 80 levels are far past convergence.
struct Fraction {
  double t0;
  double t1;
};

Fraction tail_fraction(double z) {
  double t = z;
  for (int k = kFractionDepth; k >= 2; --k) t = z + k / t;
  return {z + 1.0 / t, t};
}

}  // namespace

double pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double log_sf(double z) {
  if (z > kTailSwitch) return log_pdf(z) - std::log(tail_fraction(z).t0);
  if (z < 0.0) return std::log1p(-cdf(z));
  return std::log(sf(z));
}

double log_cdf(double z) { return log_sf(-z); }

double upper_hazard(double z) {
  if (z > kTailSwitch) return tail_fraction(z).t0;
  return pdf(z) / sf(z);
}

double lower_hazard(double z) { return upper_hazard(-z); }

double upper_hazard_minus_z(double z) {
  if (z > kTailSwitch) return 1.0 / tail_fraction(z).t1;
  return upper_hazard(z) - z;
}

}  // namespace grabit::normal
