#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sklab {

/// Monte Carlo scalar: across-replica mean and plain standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_rep = 0;
  std::uint64_t seed = 0;
  std::string label;
};

/// Summarizes i.i.d. per-replica values in index order (the result does not
/// depend on how the replicas were scheduled).
Estimate summarize(std::span<const double> values, std::uint64_t seed, std::string label);

/// sqrt(a.se^2 + b.se^2).
double combined_sigma(const Estimate& a, const Estimate& b);

/// Sample variance (n - 1 denominator) and its approximate standard error
/// sqrt((m4 - var^2 (n-3)/(n-1)) / n).
struct VarianceEstimate {
  double variance = 0.0;
  double std_error = 0.0;
};
VarianceEstimate sample_variance(std::span<const double> values);

/// Weighted least-squares slope of y on x with known per-point standard
/// errors (unit weights when every error is zero).
struct SlopeFit {
  double slope = 0.0;
  double slope_se = 0.0;
  /// slope / slope_se; +-inf when the fit is exact and the slope nonzero.
  double t_stat = 0.0;
};
SlopeFit weighted_slope(std::span<const double> x, std::span<const double> y,
                        std::span<const double> se);

}  // namespace sklab
