#pragma once

// Standard normal distribution helpers that stay accurate far into the tails.
//
// For |z| <= 8 everything goes through std::erfc. Beyond that the tail ratio
// Q(z)/phi(z) is evaluated by its continued fraction and logs are formed from
// log(phi) + log(ratio), so no quantity is ever derived from an underflowed
// probability.

namespace grabit::normal {

inline constexpr double kTailSwitch = 8.0;

double pdf(double z);
double log_pdf(double z);

// Phi(z) and 1 - Phi(z).
double cdf(double z);
double sf(double z);

// log Phi(z) and log(1 - Phi(z)).
double log_cdf(double z);
double log_sf(double z);

// Upper-tail hazard phi(z) / (1 - Phi(z)), the inverse Mills ratio for
// censoring from above. Always positive and finite for finite z.
double upper_hazard(double z);

// phi(z) / Phi(z); equals upper_hazard(-z).
double lower_hazard(double z);

// upper_hazard(z) - z, computed without cancellation for large z. This is the
// second factor of the upper-censored Hessian.
double upper_hazard_minus_z(double z);

}  // namespace grabit::normal
