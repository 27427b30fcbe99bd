#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sklab/configurations.hpp"
#include "sklab/disorder.hpp"
#include "sklab/mixture.hpp"
#include "sklab/rost.hpp"
#include "sklab/stats.hpp"

namespace sklab {

/// Default size caps for the exact engines.
inline constexpr int kWhtMaxSpins = 12;
inline constexpr int kExplicitMaxSpins = 14;

double log_sum_exp(std::span<const double> values);
/// log(2 cosh x) without overflow.
double log_two_cosh(double x);

/// H(sigma) + h * sum_i sigma_i for every sigma in Sigma_N.
std::vector<double> field_energies(std::span<const double> hamiltonian, double field, int n);

/// log Z(d) for d = 0..N, where Z(d) sums the two-copy Gibbs weight over all
/// pairs at Hamming distance d (overlap 1 - 2d/N).
struct OverlapResolvedPartition {
  int n = 0;
  std::vector<double> log_z;

  double log_at(int d) const { return log_z.at(static_cast<std::size_t>(d)); }
  /// Exact slice R = u_N.
  double log_at(const OverlapConstraint& c) const;
  /// Window |R - u_N| <= eps.
  double log_window(const OverlapConstraint& c) const;
  /// All pairs: log(sum_sigma t1) + log(sum_sigma t2).
  double log_total() const;
};

enum class OverlapEngine { walsh_hadamard, layered, brute_force };

/// Overlap-resolved two-copy partition function of the weights exp(e1), exp(e2)
/// (log-domain, one max-shift per table). The Walsh-Hadamard engine falls back
/// to the layered engine if cancellation leaves a non-positive Z(d).
OverlapResolvedPartition overlap_partition(std::span<const double> e1, std::span<const double> e2, int n,
                                           OverlapEngine engine = OverlapEngine::walsh_hadamard);

OverlapResolvedPartition partition_by_overlap(const HamiltonianTable& table, double h1, double h2,
                                              OverlapEngine engine = OverlapEngine::walsh_hadamard);

/// log Z(d_lo, d_hi) with configurations split into n_lo low and n_hi high bits.
struct SplitOverlapPartition {
  int n_lo = 0;
  int n_hi = 0;
  std::vector<double> log_z;
  double log_at(int d_lo, int d_hi) const {
    return log_z.at(static_cast<std::size_t>(d_lo * (n_hi + 1) + d_hi));
  }
};

SplitOverlapPartition split_overlap_partition(std::span<const double> e1, std::span<const double> e2,
                                              int n_lo, int n_hi);

/// log of the sum over (tau1, tau2) in Sigma_N^2 with d disagreements of
/// exp(sum_i tau1_i a_i + tau2_i b_i), for every d = 0..N. Disagreement-count
/// recursion, O(N^2), positive terms only.
std::vector<double> inner_cavity_profile(std::span<const double> a, std::span<const double> b);
double inner_cavity_sum(std::span<const double> a, std::span<const double> b, const OverlapConstraint& c);

/// Overlap-resolved partitions for n_rep independent disorder replicas
/// (replica r uses seed derive_seed(seed, r)).
std::vector<OverlapResolvedPartition> sample_partitions(const MixtureSpec& spec, int n, int n_rep,
                                                        std::uint64_t seed, SamplerKind kind);

/// (1/N) E log Z_N(u_N); the constraint must have eps = 0.
Estimate estimate_F(const MixtureSpec& spec, int n, const OverlapConstraint& c, int n_rep, std::uint64_t seed,
                    SamplerKind kind = SamplerKind::tensor);
/// (1/N) E log of the sum over the window |R - u_N| <= eps.
Estimate estimate_F_window(const MixtureSpec& spec, int n, const OverlapConstraint& c, int n_rep,
                           std::uint64_t seed, SamplerKind kind = SamplerKind::tensor);

/// The two terms of the ROSt functional for one draw of weights and fields.
struct GTerms {
  double term1 = 0.0;
  double term2 = 0.0;
  double value() const { return term1 - term2; }
};

GTerms g_functional(std::span<const double> log_weights, const CavityFieldSample& fields, double h1, double h2,
                    const OverlapConstraint& c);

struct GEstimate {
  Estimate value;
  Estimate term1;
  Estimate term2;
};

/// Monte Carlo over (weights, fields). Replica r draws weights from
/// derive_seed(r_seed, 1) and fields from derive_seed(r_seed, 2), so the two are
/// independent; the difference is formed per replica.
GEstimate estimate_G(const RostSpec& rost, const MixtureSpec& spec, int n, const OverlapConstraint& c, int n_rep,
                     std::uint64_t seed);

/// The explicit ROSt built from an M-spin system: A = {(rho1, rho2) : R = u_M},
/// q_{alpha,beta}^{l,l'} = R(rho^l_alpha, rho^l'_beta), delta = |u_M - u|.
struct ExplicitRost {
  int m = 0;
  int n = 0;
  OverlapConstraint constraint_m{1, 1};
  double u = 0.0;
  std::vector<std::pair<Mask, Mask>> alphas;

  double delta() const { return std::abs(constraint_m.u() - u); }
  double q_at(int l, int lp, int alpha, int beta) const;
  /// Materializes the q-matrices (|A| <= max_size).
  RostSpec rost_spec(int max_size = 4096) const;
};

ExplicitRost build_explicit_rost(const MixtureSpec& spec, int m, int n, const OverlapConstraint& c_m, double u);

/// One disorder draw of the explicit ROSt: normalized weights and both field
/// variants, tabulated per rho.
struct ExplicitRostDraw {
  ExplicitCavity::Tables tables;
  std::vector<double> log_weights;
  double log_weight_norm = 0.0;

  /// Fields indexed by alpha (materialized on demand).
  CavityFieldSample fields(const ExplicitRost& rost, CavityVariant variant) const;
};

ExplicitRostDraw draw_explicit_rost(const ExplicitRost& rost, const MixtureSpec& spec, std::uint64_t seed);

struct GMNReplica {
  GTerms limit;
  GTerms finite;
  /// (1/N) log Z_{M,N} with the full (M+N)-spin Hamiltonian, minus
  /// (1/N) log of the same sum with the remainder terms dropped (finite-M
  /// cavity fields). Nonnegative in expectation.
  double holder_gap = 0.0;
};

GMNReplica explicit_g_replica(const ExplicitRost& rost, const MixtureSpec& spec, const OverlapConstraint& c_n,
                              std::uint64_t seed, bool with_holder);

struct GMNEstimate {
  GEstimate limit;
  GEstimate finite;
  std::optional<Estimate> holder_gap;
};

/// G_{M,N} evaluated on the explicit ROSt with constraint u_M on the first M
/// spins and u'_N on the last N.
GMNEstimate estimate_G_MN(const MixtureSpec& spec, int m, int n, const OverlapConstraint& c_m,
                          const OverlapConstraint& c_n, int n_rep, std::uint64_t seed, bool with_holder = true);

}  // namespace sklab
