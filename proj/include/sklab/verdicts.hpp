#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sklab/configurations.hpp"
#include "sklab/free_energy.hpp"
#include "sklab/mixture.hpp"
#include "sklab/rost.hpp"
#include "sklab/stats.hpp"

namespace sklab {

/// Machine-readable outcome of one statistical check.
struct Verdict {
  std::string check;
  nlohmann::json sizes = nlohmann::json::array();
  double fitted_constant = 0.0;
  /// Distance from the failure boundary in standard errors (positive = inside).
  double margin_sigmas = 0.0;
  bool pass = false;
  /// Supporting numbers; not part of the compact report.
  nlohmann::json detail = nlohmann::json::object();

  /// {check, sizes, fitted_constant, margin_sigmas, pass}.
  nlohmann::json to_json() const;
};

nlohmann::json verdicts_to_json(const std::vector<Verdict>& verdicts);

/// Window-versus-slice gaps at one N.
struct WindowGapRow {
  int n = 0;
  OverlapConstraint constraint{1, 1};
  std::vector<double> eps;
  std::vector<Estimate> gap;
  /// Smallest per-replica gap over all eps (should be >= 0).
  double min_replica_gap = 0.0;
  /// max_eps mean gap / sqrt(eps) and the standard error of the maximizer.
  double fitted = 0.0;
  double fitted_se = 0.0;
};

/// Window-continuity check: for each N, F_N(U_{N,eps}) - F_N(u_N) over the eps
/// grid from one set of replicas (seed derive_seed(seed, N)); L_N is the
/// largest gap / sqrt(eps). Passes when every per-replica gap is >= 0 and the
/// weighted slope of L_N against N has t-statistic below 2.
struct WindowGapResult {
  std::vector<WindowGapRow> rows;
  SlopeFit trend;
  Verdict verdict;
};

WindowGapResult window_gap_check(const MixtureSpec& spec, const std::vector<int>& sizes, double u,
                                 const std::vector<double>& eps_grid, int n_rep, std::uint64_t seed,
                                 SamplerKind kind = SamplerKind::tensor);

/// Composite superadditivity check over size pairs with N/2 <= M <= 2N.
///
/// Per pair: D = (M+N) F_{M+N}(u_{M+N}) - M F_M(u_M) - N F_N(u_N) with
/// independent seeds, and the interpolation increment
/// phi(1) - phi(0) >= constrained / (M+N), which is asserted within 3 sigma.
/// The deficit max(0, -D) / sqrt(M+N) is fitted and monitored: the check
/// fails if it grows with M+N (t-statistic >= 2).
struct SuperaddRow {
  int m = 0;
  int n = 0;
  Estimate composite;
  Estimate increment;
  double constrained = 0.0;
  double deficit = 0.0;
  double increment_sigmas = 0.0;
};

struct SuperaddResult {
  std::vector<SuperaddRow> rows;
  Verdict verdict;
};

/// Pairs (M, N) with M, N in [n_min, n_max], N/2 <= M <= 2N and M + N <= max_total.
std::vector<std::pair<int, int>> restricted_range_pairs(int n_min, int n_max, int max_total);

SuperaddResult superadd_check(const MixtureSpec& spec, const std::vector<std::pair<int, int>>& pairs, double u,
                              int n_rep, std::uint64_t seed);

/// F_N(u_N) <= G_N + max_alpha |xi12(u_N) - u_N xi12'(q12_aa) + theta12(q12_aa)|,
/// with a `margin` sigma statistical allowance (combined standard error).
struct UpperBoundResult {
  Estimate f;
  GEstimate g;
  double bound = 0.0;
  Verdict verdict;
};

UpperBoundResult upper_bound_check(const RostSpec& rost, const MixtureSpec& spec, const OverlapConstraint& c,
                                   int n_rep, std::uint64_t seed, double margin = 4.0);

/// The same inequality with the explicit structure of an M-spin system
/// (q12 diagonal = u_M) and its limit cavity fields.
UpperBoundResult explicit_upper_bound_check(const MixtureSpec& spec, int m, const OverlapConstraint& c_m,
                                            const OverlapConstraint& c, int n_rep, std::uint64_t seed,
                                            double margin = 4.0);

/// Two admissible targets u_N and u_N'' = u_N + 2/N (or - 2/N at the edge)
/// from the same replicas: |F(u_N) - F(u_N'')| <= L sqrt(|u_N - u_N''|) + 3 sigma,
/// sigma the standard error of the per-replica difference.
struct SequenceRow {
  int n = 0;
  OverlapConstraint first{1, 1};
  OverlapConstraint second{1, 1};
  Estimate difference;
  double allowance = 0.0;
};

struct SequenceResult {
  std::vector<SequenceRow> rows;
  Verdict verdict;
};

SequenceResult sequence_independence_check(const MixtureSpec& spec, const std::vector<int>& sizes, double u,
                                           double fitted_constant, int n_rep, std::uint64_t seed,
                                           SamplerKind kind = SamplerKind::tensor);

/// Sign of the structure-interpolation second line on a t-grid.
Verdict second_line_check(const RostSpec& rost, const MixtureSpec& spec, const OverlapConstraint& c,
                          const std::vector<double>& t_grid, int n_rep, std::uint64_t seed);

}  // namespace sklab
