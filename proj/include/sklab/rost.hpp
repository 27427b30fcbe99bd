#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sklab/disorder.hpp"
#include "sklab/mixture.hpp"
#include "sklab/rng.hpp"

namespace sklab {

enum class WeightKind { fixed, dirichlet, explicit_system };

struct WeightSampler {
  WeightKind kind = WeightKind::fixed;
  /// Unnormalized weights for `fixed`; normalization happens on every draw.
  std::vector<double> values;
  /// Symmetric Dirichlet concentration for `dirichlet`.
  double gamma = 1.0;
};

/// Normalized log-weights log w_alpha, alpha < size. `explicit_system`
/// weights come from an M-spin system and cannot be drawn on their own.
std::vector<double> draw_log_weights(const WeightSampler& sampler, int size, Engine& engine);

/// Which covariance the Gaussian fields of a random overlap structure carry.
enum class FieldKind { cavity, overlap };

/// A finite random overlap structure: q-matrices, weight law and delta.
///
/// q(2,1) is q(1,2) transposed. The field covariance matrices are laid out
/// blockwise with row (l-1) * size + alpha.
class RostSpec {
 public:
  RostSpec() = default;
  RostSpec(Eigen::MatrixXd q11, Eigen::MatrixXd q12, Eigen::MatrixXd q22, WeightSampler weights,
           double delta, double u);

  int size() const { return static_cast<int>(q11_.rows()); }
  Eigen::MatrixXd q(int l, int lp) const;
  double q_at(int l, int lp, int alpha, int beta) const;
  const WeightSampler& weights() const { return weights_; }
  double delta() const { return delta_; }
  double u() const { return u_; }

  /// xi'_{l,l'}(q^{l,l'}) for FieldKind::cavity, theta_{l,l'}(q^{l,l'}) for overlap.
  Eigen::MatrixXd covariance(const MixtureSpec& spec, FieldKind kind) const;

  nlohmann::json to_json() const;
  static RostSpec from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXd q11_, q12_, q22_;
  WeightSampler weights_;
  double delta_ = 0.0;
  double u_ = 0.0;
};

/// Draws N i.i.d. copies of the z-block and one y-block; factorizes the two
/// covariances once at construction (RostInvalidError if either is not PSD).
class RostFieldSampler {
 public:
  RostFieldSampler(const RostSpec& rost, const MixtureSpec& spec);
  CavityFieldSample sample(int n_sites, std::uint64_t seed) const;

 private:
  int size_;
  Eigen::MatrixXd z_factor_;
  Eigen::MatrixXd y_factor_;
};

CavityFieldSample sample_rost_fields(const RostSpec& rost, const MixtureSpec& spec, int n_sites,
                                     std::uint64_t seed);

/// A valid structure of `size` elements: q from inner products of random unit
/// vectors in R^dim, with q^{1,2}_{alpha,alpha} drawn uniformly from
/// [u - delta, u + delta]. Gram-type q keeps xi'(q) and theta(q) PSD for
/// mixtures with nonnegative xi coefficients.
RostSpec random_rost(int size, double u, double delta, WeightSampler weights, Engine& engine,
                     int dim = 8);

}  // namespace sklab
