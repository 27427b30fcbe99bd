#include "sklab/verdicts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sklab/error.hpp"
#include "sklab/interpolation.hpp"
#include "sklab/parallel.hpp"
#include "sklab/rng.hpp"

namespace sklab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExactSlack = 1e-12;

/// value / sigma, with a zero sigma read as exact arithmetic.
double in_sigmas(double value, double sigma) {
  if (sigma > 0.0) return value / sigma;
  if (value >= -kExactSlack) return value > kExactSlack ? kInf : 0.0;
  return -kInf;
}

/// Finite stand-in for JSON output.
double json_number(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -1e300, 1e300);
}

}  // namespace

nlohmann::json Verdict::to_json() const {
  return {{"check", check},
          {"sizes", sizes},
          {"fitted_constant", json_number(fitted_constant)},
          {"margin_sigmas", json_number(margin_sigmas)},
          {"pass", pass}};
}

nlohmann::json verdicts_to_json(const std::vector<Verdict>& verdicts) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : verdicts) out.push_back(v.to_json());
  return out;
}

WindowGapResult window_gap_check(const MixtureSpec& spec, const std::vector<int>& sizes, double u,
                                 const std::vector<double>& eps_grid, int n_rep, std::uint64_t seed,
                                 SamplerKind kind) {
  if (sizes.size() < 2) throw PreconditionError("window gap check needs at least two sizes");
  if (std::none_of(eps_grid.begin(), eps_grid.end(), [](double e) { return e > 0.0; })) {
    throw PreconditionError("window gap check needs a positive eps in the grid");
  }
  if (n_rep < 2) throw PreconditionError("window gap check needs n_rep >= 2");
  WindowGapResult result;
  bool all_nonnegative = true;
  for (int n : sizes) {
    WindowGapRow row;
    row.n = n;
    row.constraint = nearest_admissible(n, u);
    row.eps = eps_grid;
    const std::uint64_t row_seed = derive_seed(seed, static_cast<std::uint64_t>(n));
    const auto parts = sample_partitions(spec, n, n_rep, row_seed, kind);
    row.min_replica_gap = kInf;
    row.fitted = -kInf;
    std::vector<double> gaps(static_cast<std::size_t>(n_rep));
    for (double eps : eps_grid) {
      const OverlapConstraint window = row.constraint.with_eps(eps);
      for (int r = 0; r < n_rep; ++r) {
        gaps[r] = (parts[r].log_window(window) - parts[r].log_at(row.constraint)) / n;
        row.min_replica_gap = std::min(row.min_replica_gap, gaps[r]);
      }
      Estimate e = summarize(gaps, row_seed, "window_gap");
      if (eps > 0.0 && e.mean / std::sqrt(eps) > row.fitted) {
        row.fitted = e.mean / std::sqrt(eps);
        row.fitted_se = e.std_error / std::sqrt(eps);
      }
      row.gap.push_back(std::move(e));
    }
    all_nonnegative = all_nonnegative && row.min_replica_gap >= -kExactSlack;
    result.rows.push_back(std::move(row));
  }
  std::vector<double> x, y, se;
  for (const auto& row : result.rows) {
    x.push_back(row.n);
    y.push_back(row.fitted);
    se.push_back(row.fitted_se);
  }
  result.trend = weighted_slope(x, y, se);
  Verdict& v = result.verdict;
  v.check = "window_continuity";
  for (int n : sizes) v.sizes.push_back(n);
  v.fitted_constant = *std::max_element(y.begin(), y.end());
  v.margin_sigmas = 2.0 - result.trend.t_stat;
  v.pass = all_nonnegative && result.trend.t_stat < 2.0;
  v.detail = {{"slope", json_number(result.trend.slope)},
              {"slope_t_stat", json_number(result.trend.t_stat)},
              {"per_size", nlohmann::json::array()}};
  for (const auto& row : result.rows) {
    v.detail["per_size"].push_back({{"n", row.n},
                                    {"fitted", row.fitted},
                                    {"fitted_stderr", row.fitted_se},
                                    {"min_replica_gap", row.min_replica_gap}});
  }
  return result;
}

std::vector<std::pair<int, int>> restricted_range_pairs(int n_min, int n_max, int max_total) {
  std::vector<std::pair<int, int>> out;
  for (int m = n_min; m <= n_max; ++m) {
    for (int n = n_min; n <= n_max; ++n) {
      if (2 * m >= n && m <= 2 * n && m + n <= max_total) out.emplace_back(m, n);
    }
  }
  return out;
}

SuperaddResult superadd_check(const MixtureSpec& spec, const std::vector<std::pair<int, int>>& pairs, double u,
                              int n_rep, std::uint64_t seed) {
  if (pairs.empty()) throw PreconditionError("superadditivity check needs at least one size pair");
  SuperaddResult result;
  bool increments_ok = true;
  for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
    const auto [m, n] = pairs[idx];
    if (2 * m < n || m > 2 * n) throw PreconditionError("size pair outside N/2 <= M <= 2N");
    const std::uint64_t pair_seed = derive_seed(seed, idx);
    const OverlapConstraint cm = nearest_admissible(m, u);
    const OverlapConstraint cn = nearest_admissible(n, u);
    const OverlapConstraint cj = nearest_admissible(m + n, u);
    const Estimate fj = estimate_F(spec, m + n, cj, n_rep, derive_seed(pair_seed, 1));
    const Estimate fm = estimate_F(spec, m, cm, n_rep, derive_seed(pair_seed, 2));
    const Estimate fn = estimate_F(spec, n, cn, n_rep, derive_seed(pair_seed, 3));
    SuperaddRow row;
    row.m = m;
    row.n = n;
    row.composite.mean = (m + n) * fj.mean - m * fm.mean - n * fn.mean;
    row.composite.std_error = std::sqrt(std::pow((m + n) * fj.std_error, 2) + std::pow(m * fm.std_error, 2) +
                                        std::pow(n * fn.std_error, 2));
    row.composite.n_rep = n_rep;
    row.composite.seed = pair_seed;
    row.composite.label = "composite";

    const SizeInterpolation ip(spec, cm, cn);
    const std::uint64_t interp_seed = derive_seed(pair_seed, 4);
    const std::vector<double> inc = map_replicas<double>(n_rep, [&](int r) {
      const auto rep = ip.draw(derive_seed(interp_seed, static_cast<std::uint64_t>(r)));
      return ip.phi(rep, 1.0) - ip.phi(rep, 0.0);
    });
    row.increment = summarize(inc, interp_seed, "increment");
    row.constrained = ip.constrained_term() / (m + n);
    row.increment_sigmas = in_sigmas(row.increment.mean - row.constrained, row.increment.std_error);
    increments_ok = increments_ok && row.increment_sigmas >= -3.0;
    row.deficit = std::max(0.0, -row.composite.mean) / std::sqrt(static_cast<double>(m + n));
    result.rows.push_back(row);
  }
  Verdict& v = result.verdict;
  v.check = "superadditivity";
  v.detail = {{"pairs", nlohmann::json::array()}};
  std::vector<double> x, y, se;
  double worst_increment = kInf;
  for (const auto& row : result.rows) {
    v.sizes.push_back({row.m, row.n});
    x.push_back(row.m + row.n);
    y.push_back(row.deficit);
    se.push_back(row.composite.std_error / std::sqrt(static_cast<double>(row.m + row.n)));
    worst_increment = std::min(worst_increment, row.increment_sigmas);
    v.detail["pairs"].push_back({{"m", row.m},
                                 {"n", row.n},
                                 {"composite", row.composite.mean},
                                 {"composite_stderr", row.composite.std_error},
                                 {"increment", row.increment.mean},
                                 {"increment_stderr", row.increment.std_error},
                                 {"constrained_bound", row.constrained}});
  }
  v.fitted_constant = *std::max_element(y.begin(), y.end());
  bool trend_ok = true;
  const std::set<double> totals(x.begin(), x.end());
  if (totals.size() >= 2 && v.fitted_constant > 0.0) {
    const SlopeFit fit = weighted_slope(x, y, se);
    trend_ok = fit.t_stat < 2.0;
    v.detail["deficit_slope_t_stat"] = json_number(fit.t_stat);
  }
  v.margin_sigmas = worst_increment + 3.0;
  v.pass = increments_ok && trend_ok;
  return result;
}

namespace {

UpperBoundResult finish_upper_bound(Estimate f, GEstimate g, double bound, double margin, nlohmann::json sizes,
                                    std::string name) {
  UpperBoundResult out;
  out.f = std::move(f);
  out.g = std::move(g);
  out.bound = bound;
  const double sigma = combined_sigma(out.f, out.g.value);
  const double slack = out.g.value.mean + bound - out.f.mean;
  Verdict& v = out.verdict;
  v.check = std::move(name);
  v.sizes = std::move(sizes);
  v.fitted_constant = bound;
  v.margin_sigmas = in_sigmas(slack, sigma);
  v.pass = slack + margin * sigma >= 0.0;
  v.detail = {{"f", out.f.mean},          {"f_stderr", out.f.std_error}, {"g", out.g.value.mean},
              {"g_stderr", out.g.value.std_error}, {"bound", bound},     {"margin", margin}};
  return out;
}

}  // namespace

UpperBoundResult upper_bound_check(const RostSpec& rost, const MixtureSpec& spec, const OverlapConstraint& c,
                                   int n_rep, std::uint64_t seed, double margin) {
  require_convex(spec, "upper bound check");
  const int n = c.n();
  Estimate f = estimate_F(spec, n, c.with_eps(0.0), n_rep, derive_seed(seed, 1));
  GEstimate g = estimate_G(rost, spec, n, c.with_eps(0.0), n_rep, derive_seed(seed, 2));
  double bound = 0.0;
  for (int a = 0; a < rost.size(); ++a) {
    bound = std::max(bound, std::abs(first_line_integrand(spec, c.u(), rost.q_at(1, 2, a, a))));
  }
  return finish_upper_bound(std::move(f), std::move(g), bound, margin, {rost.size(), n}, "upper_bound");
}

UpperBoundResult explicit_upper_bound_check(const MixtureSpec& spec, int m, const OverlapConstraint& c_m,
                                            const OverlapConstraint& c, int n_rep, std::uint64_t seed,
                                            double margin) {
  require_convex(spec, "explicit upper bound check");
  const int n = c.n();
  Estimate f = estimate_F(spec, n, c.with_eps(0.0), n_rep, derive_seed(seed, 1));
  const GMNEstimate gmn = estimate_G_MN(spec, m, n, c_m, c.with_eps(0.0), n_rep, derive_seed(seed, 2), false);
  const double bound = std::abs(first_line_integrand(spec, c.u(), c_m.u()));
  return finish_upper_bound(std::move(f), gmn.limit, bound, margin, {m, n}, "explicit_upper_bound");
}

SequenceResult sequence_independence_check(const MixtureSpec& spec, const std::vector<int>& sizes, double u,
                                           double fitted_constant, int n_rep, std::uint64_t seed,
                                           SamplerKind kind) {
  if (sizes.empty()) throw PreconditionError("sequence check needs at least one size");
  SequenceResult result;
  Verdict& v = result.verdict;
  v.check = "sequence_independence";
  v.fitted_constant = fitted_constant;
  v.pass = true;
  v.margin_sigmas = kInf;
  v.detail = {{"per_size", nlohmann::json::array()}};
  for (int n : sizes) {
    SequenceRow row;
    row.n = n;
    row.first = nearest_admissible(n, u);
    const int k2 = row.first.k() + 2 <= n ? row.first.k() + 2 : row.first.k() - 2;
    row.second = OverlapConstraint(n, k2);
    const std::uint64_t row_seed = derive_seed(seed, static_cast<std::uint64_t>(n));
    const auto parts = sample_partitions(spec, n, n_rep, row_seed, kind);
    std::vector<double> diff(static_cast<std::size_t>(n_rep));
    for (int r = 0; r < n_rep; ++r) diff[r] = (parts[r].log_at(row.first) - parts[r].log_at(row.second)) / n;
    row.difference = summarize(diff, row_seed, "sequence_difference");
    const double du = std::abs(row.first.u() - row.second.u());
    row.allowance = fitted_constant * std::sqrt(du);
    const double slack = row.allowance - std::abs(row.difference.mean);
    const double sig = in_sigmas(slack, row.difference.std_error);
    v.margin_sigmas = std::min(v.margin_sigmas, sig + 3.0);
    v.pass = v.pass && slack + 3.0 * row.difference.std_error >= -kExactSlack;
    v.sizes.push_back(n);
    v.detail["per_size"].push_back({{"n", n},
                                    {"u_first", row.first.u()},
                                    {"u_second", row.second.u()},
                                    {"difference", row.difference.mean},
                                    {"difference_stderr", row.difference.std_error},
                                    {"allowance", row.allowance}});
    result.rows.push_back(std::move(row));
  }
  return result;
}

Verdict second_line_check(const RostSpec& rost, const MixtureSpec& spec, const OverlapConstraint& c,
                          const std::vector<double>& t_grid, int n_rep, std::uint64_t seed) {
  if (n_rep < 2) throw PreconditionError("second line check needs n_rep >= 2");
  const StructureInterpolation ip(rost, spec, c);
  const auto values = map_replicas<std::vector<double>>(n_rep, [&](int r) {
    const auto rep = ip.draw(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<double> out;
    for (double t : t_grid) out.push_back(ip.phi_prime(rep, t).second);
    return out;
  });
  Verdict v;
  v.check = "second_line_sign";
  v.sizes = {rost.size(), c.n()};
  v.margin_sigmas = kInf;
  v.detail = {{"per_t", nlohmann::json::array()}};
  std::vector<double> col(static_cast<std::size_t>(n_rep));
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    for (int r = 0; r < n_rep; ++r) col[r] = values[r][j];
    const Estimate e = summarize(col, seed, "second_line");
    const double above = in_sigmas(e.mean, e.std_error);
    v.margin_sigmas = std::min(v.margin_sigmas, 3.0 - above);
    v.detail["per_t"].push_back({{"t", t_grid[j]}, {"mean", e.mean}, {"stderr", e.std_error}});
  }
  v.pass = v.margin_sigmas >= 0.0;
  return v;
}

}  // namespace sklab
