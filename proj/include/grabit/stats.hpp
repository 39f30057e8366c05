#pragma once

#include <span>
#include <vector>

namespace grabit::stats {

double mean(std::span<const double> x);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sd(std::span<const double> x);

// Linear-interpolation quantile on the sorted sample (the usual "type 7"
// definition): position q * (n - 1).
double quantile(std::vector<double> x, double q);

// Median; for even counts the lower of the two middle values.
double lower_median(std::vector<double> x);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace grabit::stats
