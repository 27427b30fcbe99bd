#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

namespace sklab {

/// Coefficients of the two mixed p-spin Hamiltonians plus their external fields.
///
/// Copy indices are 1-based (`l`, `lp` in {1, 2}); coefficient `coeff(l, p)` is
/// the weight of the p-spin term, p = 1..p_max. Both sequences are padded to a
/// common truncation order. Instances are immutable and safe to share across
/// threads.
class MixtureSpec {
 public:
  MixtureSpec() = default;
  MixtureSpec(std::vector<double> a1, std::vector<double> a2, double h1 = 0.0,
              double h2 = 0.0);

  /// Both copies share the same coefficients.
  static MixtureSpec symmetric(std::vector<double> a, double h1 = 0.0, double h2 = 0.0);
  /// Single p-spin term with amplitude `amplitude` in both copies.
  static MixtureSpec pure(int p, double amplitude = 1.0, double h1 = 0.0, double h2 = 0.0);

  int p_max() const { return static_cast<int>(a_[0].size()); }
  double coeff(int l, int p) const;
  const std::vector<double>& coeffs(int l) const;
  double field(int l) const;
  bool is_zero() const;

  double xi(int l, int lp, double x) const;
  double xi_prime(int l, int lp, double x) const;
  double xi_second(int l, int lp, double x) const;
  /// x * xi'(x) - xi(x).
  double theta(int l, int lp, double x) const;

  nlohmann::json to_json() const;
  static MixtureSpec from_json(const nlohmann::json& j);

 private:
  std::array<std::vector<double>, 2> a_;
  std::array<double, 2> h_{0.0, 0.0};
};

// Free-function spellings of the evaluators.
double eval_xi(const MixtureSpec& spec, int l, int lp, double x);
double eval_theta(const MixtureSpec& spec, int l, int lp, double x);

/// The three distinct copy pairs (1,1), (1,2), (2,2).
inline constexpr std::array<std::array<int, 2>, 3> kCopyPairs{{{1, 1}, {1, 2}, {2, 2}}};

struct ConvexityReport {
  bool convex = true;
  /// All odd-p coefficients vanish and a^1_p a^2_p >= 0 for even p.
  bool structural = false;
  double worst_second_difference = 0.0;
  std::array<int, 2> worst_pair{1, 1};
  double worst_x = 0.0;
};

inline constexpr double kConvexityTolerance = 1e-10;
inline constexpr int kConvexityGrid = 1001;

ConvexityReport check_convexity(const MixtureSpec& spec, int grid_size = kConvexityGrid,
                                double tol = kConvexityTolerance);

/// Throws StructuralError naming the offending pair and grid point when the
/// mixture is not convex. `context` names the caller in the message.
void require_convex(const MixtureSpec& spec, const std::string& context);

struct PositivityReport {
  /// min over the grid of xi(x) - x xi'(y) + theta(y), per copy pair.
  std::array<double, 3> minimum{};
  std::array<std::array<double, 2>, 3> argmin{};
  double overall_minimum() const;
};

PositivityReport check_positivity(const MixtureSpec& spec, int grid_size);

/// I(x) = ((1+x)log(1+x) + (1-x)log(1-x)) / 2 on [0, 1], with I(1) = log 2.
double binary_entropy(double x);

}  // namespace sklab
