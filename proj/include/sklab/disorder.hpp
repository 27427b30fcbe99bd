#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sklab/configurations.hpp"
#include "sklab/mixture.hpp"
#include "sklab/tensor.hpp"

namespace sklab {

enum class Provenance : std::uint32_t { tensor = 0, process = 1 };

/// One disorder sample: H^1(sigma) and H^2(sigma) for every sigma in Sigma_N.
struct HamiltonianTable {
  int n = 0;
  int p_max = 0;
  std::uint64_t seed = 0;
  Provenance provenance = Provenance::tensor;
  std::array<std::vector<double>, 2> energy;

  const std::vector<double>& values(int l) const { return energy.at(static_cast<std::size_t>(l - 1)); }
};

/// Largest N for the covariance-factorization sampler (a 2*2^N matrix).
inline constexpr int kProcessMaxSpins = 10;
/// Jitter ceiling, as a fraction of trace/dim, before a covariance is declared indefinite.
inline constexpr double kJitterBudget = 1e-10;

/// Draws the coupling tensors once and evaluates both Hamiltonians (shared
/// tensors, copy-specific coefficients) on all of Sigma_N.
HamiltonianTable sample_tensor(const MixtureSpec& spec, int n, std::uint64_t seed);

/// Samples (H^1(sigma), H^2(sigma))_sigma as a Gaussian vector with covariance
/// N xi_{l,l'}(R(sigma, sigma')).
HamiltonianTable sample_process(const MixtureSpec& spec, int n, std::uint64_t seed);

enum class SamplerKind { tensor, process };
std::string to_string(SamplerKind kind);
SamplerKind sampler_from_string(const std::string& name);

/// Reusable table sampler. The process route factorizes its covariance once at
/// construction; sample() is const and thread-safe.
class TableSampler {
 public:
  TableSampler(MixtureSpec spec, int n, SamplerKind kind);

  HamiltonianTable sample(std::uint64_t seed) const;
  int n() const { return n_; }
  SamplerKind kind() const { return kind_; }
  const MixtureSpec& spec() const { return spec_; }

 private:
  MixtureSpec spec_;
  int n_;
  SamplerKind kind_;
  std::shared_ptr<const Eigen::MatrixXd> factor_;
};

/// Lower factor L with L L^T = cov + jitter I, trying jitter 0 and then
/// 1e-16 .. kJitterBudget times trace/dim. Throws FactorizationError naming
/// `what` and the smallest eigenvalue when every attempt fails.
Eigen::MatrixXd gaussian_factor(const Eigen::MatrixXd& cov, const std::string& what);

/// Binary table dump: u32 n, u32 p_max, u64 seed, u32 provenance, then
/// 2 * 2^n little-endian float64 values, sigma-index major, copy 1 block first.
void write_table(std::ostream& out, const HamiltonianTable& table);
HamiltonianTable read_table(std::istream& in);

enum class CavityVariant { limit, finite };

/// Gaussian cavity fields over an index set of `size` elements:
/// z[l-1][i * size + alpha] for sites i < n_sites, and y[l-1][alpha].
struct CavityFieldSample {
  int n_sites = 0;
  int size = 0;
  CavityVariant variant = CavityVariant::limit;
  std::array<std::vector<double>, 2> z;
  std::array<std::vector<double>, 2> y;

  double z_at(int l, int site, int alpha) const {
    return z[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(site) * size + alpha];
  }
  double y_at(int l, int alpha) const { return y[static_cast<std::size_t>(l - 1)][alpha]; }
};

/// One draw of the disorder of an (M+N)-spin system split as sigma = (rho, tau),
/// rho the first M coordinates. Provides the rho-only part of H_{M+N}, the
/// cavity fields Z_i (finite M) and their limit z_i built from the same
/// couplings, and the overlap-correction fields Y (finite M) and y (limit)
/// built from a second, independent set of couplings on M coordinates.
class ExplicitCavity {
 public:
  ExplicitCavity(MixtureSpec spec, int m, int n, std::uint64_t seed);

  int m() const { return m_; }
  int n() const { return n_; }
  const MixtureSpec& spec() const { return spec_; }

  double prefix_energy(int l, Mask rho) const;
  double cavity_field(int l, int site, Mask rho, CavityVariant variant) const;
  double overlap_field(int l, Mask rho, CavityVariant variant) const;

  /// All of the above tabulated over Sigma_M; cavity tables are indexed
  /// [site * 2^M + rho].
  struct Tables {
    std::array<std::vector<double>, 2> prefix;
    std::array<std::vector<double>, 2> z_limit, z_finite;
    std::array<std::vector<double>, 2> y_limit, y_finite;
  };
  Tables tabulate() const;

  /// H^l_{M+N}(sigma) on all of Sigma_{M+N}, rho in the low M bits.
  std::array<std::vector<double>, 2> full_energy() const;

 private:
  double z_scale(int p, CavityVariant variant) const;
  double y_scale(int p, CavityVariant variant) const;

  MixtureSpec spec_;
  int m_;
  int n_;
  CouplingTensors couplings_;
  CouplingTensors overlap_couplings_;
};

ExplicitCavity sample_explicit_cavity(const MixtureSpec& spec, int m, int n, std::uint64_t seed);

struct CovarianceProbe {
  SpinConfig sigma;
  SpinConfig sigma_prime;
  int l = 1;
  int lp = 1;
};

struct CovarianceProbeResult {
  CovarianceProbe probe;
  double target = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
};

struct CovarianceReport {
  std::vector<CovarianceProbeResult> probes;
  double max_abs_z = 0.0;
};

/// Estimates E H^l(sigma) H^l'(sigma') / N over replicas and compares with
/// xi_{l,l'}(R(sigma, sigma')).
CovarianceReport empirical_covariance(const TableSampler& sampler, int n_rep, std::uint64_t seed,
                                      std::span<const CovarianceProbe> probes);

}  // namespace sklab
