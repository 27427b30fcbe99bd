#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sklab/configurations.hpp"
#include "sklab/disorder.hpp"
#include "sklab/free_energy.hpp"
#include "sklab/mixture.hpp"
#include "sklab/rost.hpp"
#include "sklab/stats.hpp"

namespace sklab {

/// Largest ROSt size accepted by the two-replica enumeration of the
/// structure-interpolation derivative (|A|^2 pair profiles per replica).
inline constexpr int kRostPairBudget = 256;
inline constexpr double kDefaultStep = 0.05;

/// Per-replica derivative, split into its two lines. `total()` is the
/// derivative of phi.
struct DerivativeParts {
  double first = 0.0;
  double second = 0.0;
  double total() const { return first + second; }
};

/// Size-splitting interpolation on Sigma_{M+N}^2 restricted to
/// U_{M,N} = {R(rho^1, rho^2) = u_M, R(tau^1, tau^2) = u_N}:
///
///   H_t = sqrt(t) H_{M+N}(sigma) + sqrt(1 - t) (H_M(rho) + H_N(tau)),
///
/// with rho the low M coordinates and phi(t) = log(sum over U_{M,N}) / (M+N).
/// The three Hamiltonians are independent.
class SizeInterpolation {
 public:
  SizeInterpolation(MixtureSpec spec, OverlapConstraint c_m, OverlapConstraint c_n);

  struct Replica {
    std::array<std::vector<double>, 2> joint;
    std::array<std::vector<double>, 2> left;
    std::array<std::vector<double>, 2> right;
  };
  /// Tables from derive_seed(replica_seed, 1), (.., 2), (.., 3) for the (M+N)-,
  /// M- and N-systems.
  Replica draw(std::uint64_t replica_seed) const;

  double phi(const Replica& r, double t) const;
  /// first: (M+N) xi12(u') - M xi12(u_M) - N xi12(u_N), over (M+N);
  /// second: minus the convexity term, i.e. -(1/2) sum over copy pairs of the
  /// two-replica Gibbs average of (M+N) xi(R) - M xi(R_rho) - N xi(R_tau),
  /// over (M+N). The convexity term itself is -second.
  DerivativeParts phi_prime(const Replica& r, double t) const;

  /// (log Z_M(u_M) + log Z_N(u_N)) / (M+N), computed directly from the M- and
  /// N-tables; equals phi(r, 0).
  double separate_endpoint(const Replica& r) const;
  /// log Z_{M+N}(U_{M,N}) / (M+N) from the joint table; equals phi(r, 1).
  double joint_endpoint(const Replica& r) const;

  double constrained_term() const;
  int m() const { return c_m_.n(); }
  int n() const { return c_n_.n(); }
  const MixtureSpec& spec() const { return spec_; }

 private:
  std::array<std::vector<double>, 2> energies(const Replica& r, double t) const;

  MixtureSpec spec_;
  OverlapConstraint c_m_;
  OverlapConstraint c_n_;
};

/// Structure interpolation on A x {R = u_N}:
///
///   H_t = sum_l sqrt(t) (H^l_N(sigma^l) + sqrt(N) y^l(alpha))
///         + sqrt(1 - t) sum_i sigma^l_i z^l_i(alpha) + h_l sum_i sigma^l_i,
///
/// phi(t) = log(sum_alpha w_alpha sum_{R = u_N} exp H_t) / N.
class StructureInterpolation {
 public:
  StructureInterpolation(RostSpec rost, MixtureSpec spec, OverlapConstraint c);

  struct Replica {
    std::vector<double> log_weights;
    CavityFieldSample fields;
    HamiltonianTable table;
  };
  /// Weights from derive_seed(replica_seed, 1) and fields from (.., 2), as in
  /// estimate_G; the N-spin table from (.., 3).
  Replica draw(std::uint64_t replica_seed) const;

  double phi(const Replica& r, double t) const;
  /// first: Gibbs average of xi12(u_N) - u_N xi12'(q12_aa) + theta12(q12_aa);
  /// second: -(1/2) sum over copy pairs of the two-replica average of
  /// xi(R) - R xi'(q_ab) + theta(q_ab).
  DerivativeParts phi_prime(const Replica& r, double t) const;

  /// G's first term for the same draw; equals phi(r, 0).
  double cavity_endpoint(const Replica& r) const;
  /// log Z_N(u_N) / N plus G's second term; equals phi(r, 1).
  double decoupled_endpoint(const Replica& r) const;

  /// max_alpha |xi12(u_N) - u_N xi12'(q12_aa) + theta12(q12_aa)|.
  double first_line_bound() const;

  int n() const { return c_.n(); }
  const RostSpec& rost() const { return rost_; }

 private:
  MixtureSpec spec_;
  RostSpec rost_;
  OverlapConstraint c_;
  RostFieldSampler sampler_;
};

/// Derivative-line function f(q) = xi12(u) - u xi12'(q) + theta12(q).
double first_line_integrand(const MixtureSpec& spec, double u, double q);

enum class InterpolationKind { size_split, structure };
std::string to_string(InterpolationKind kind);

struct CurvePoint {
  double t = 0.0;
  Estimate phi;
  Estimate d_fd;
  Estimate d_gibbs;
  Estimate first;
  Estimate second;
};

struct InterpolationRun {
  InterpolationKind kind = InterpolationKind::size_split;
  /// (M, N) for size_split, (|A|, N) for structure.
  std::array<int, 2> sizes{0, 0};
  double step = kDefaultStep;
  std::vector<CurvePoint> points;
  /// Largest per-replica deviation of phi(0) and phi(1) from the standalone
  /// endpoint computations.
  double endpoint_error = 0.0;
  /// Per-replica phi(1) - phi(0).
  Estimate increment;

  /// Worst |d_fd - d_gibbs| in units of the combined standard error.
  double worst_derivative_sigmas() const;
  /// Largest mean of the second line, in its own standard errors.
  double worst_second_line_sigmas() const;
  /// Header t,mean,stderr,d_fd,d_gibbs; numbers in %.17g.
  std::string to_csv() const;
};

/// phi, finite-difference derivative (common random numbers, central with
/// step `step`, one-sided at the ends of [0, 1]) and Gibbs derivative at every t.
InterpolationRun run_size_interpolation(const MixtureSpec& spec, const OverlapConstraint& c_m,
                                        const OverlapConstraint& c_n, const std::vector<double>& t_grid,
                                        int n_rep, std::uint64_t seed, double step = kDefaultStep);
InterpolationRun run_structure_interpolation(const RostSpec& rost, const MixtureSpec& spec,
                                             const OverlapConstraint& c, const std::vector<double>& t_grid,
                                             int n_rep, std::uint64_t seed, double step = kDefaultStep);

}  // namespace sklab
