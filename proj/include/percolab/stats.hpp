#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace percolab::stats {

// Two-sided 95% normal quantile used for every confidence interval in the
// project.
inline constexpr double kZ95 = 1.959963984540054;

double mean(std::span<const double> xs);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_stddev(std::span<const double> xs);

double standard_error(std::span<const double> xs);

// Linear-interpolation quantile (Hyndman-Fan type 7). Input need not be sorted.
double quantile(std::span<const double> xs, double level);

struct Proportion {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double frequency() const;
  double standard_error() const;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

// Weighted least squares y = a + b x with weights w (inverse variances).
// slope_stderr comes from the weights, not the residuals.
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w);

// Two confidence intervals [c1 - h1, c1 + h1], [c2 - h2, c2 + h2] overlap.
bool intervals_overlap(double c1, double h1, double c2, double h2);

}  // namespace percolab::stats
