#include "sklab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sklab/error.hpp"

namespace sklab {

Estimate summarize(std::span<const double> values, std::uint64_t seed, std::string label) {
  Estimate e;
  e.n_rep = static_cast<int>(values.size());
  e.seed = seed;
  e.label = std::move(label);
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return e;
}

double combined_sigma(const Estimate& a, const Estimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

VarianceEstimate sample_variance(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  if (values.size() < 4) throw PreconditionError("variance estimate needs at least 4 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  VarianceEstimate out;
  out.variance = m2 / (n - 1.0);
  m2 /= n;
  m4 /= n;
  out.std_error = std::sqrt(std::max(0.0, (m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n));
  return out;
}

SlopeFit weighted_slope(std::span<const double> x, std::span<const double> y,
                        std::span<const double> se) {
  if (x.size() != y.size() || x.size() != se.size() || x.size() < 2) {
    throw PreconditionError("slope fit needs at least two matched points");
  }
  const bool unweighted = std::all_of(se.begin(), se.end(), [](double s) { return s <= 0.0; });
  std::vector<double> w(x.size(), 1.0);
  if (!unweighted) {
    // Floor tiny errors so one near-exact point cannot take all the weight.
    double floor = 0.0;
    for (double s : se) floor = std::max(floor, s);
    floor *= 1e-3;
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = 1.0 / std::pow(std::max(se[i], floor), 2);
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx <= 0.0) throw PreconditionError("slope fit needs distinct x values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.slope_se = unweighted ? 0.0 : std::sqrt(1.0 / sxx);
  if (fit.slope_se > 0.0) {
    fit.t_stat = fit.slope / fit.slope_se;
  } else if (fit.slope == 0.0) {
    fit.t_stat = 0.0;
  } else {
    fit.t_stat = std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
  }
  return fit;
}

}  // namespace sklab
