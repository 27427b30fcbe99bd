#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sklab {

using Mask = std::uint32_t;

/// Largest N the exhaustive enumeration engine accepts.
inline constexpr int kMaxSpins = 20;

int popcount(Mask m);
inline Mask low_mask(int n) { return n >= 32 ? ~Mask{0} : (Mask{1} << n) - 1; }
/// Sum of spins of a configuration: N - 2 * (number of -1 spins).
inline int magnetization(Mask bits, int n) { return n - 2 * popcount(bits); }

/// A configuration in {-1,+1}^N. Bit i set means spin i is -1.
///
/// Text form lists spins from the highest index down to spin 0, the same order
/// a binary literal is written in: "+++-" has spin 0 equal to -1.
struct SpinConfig {
  int n = 0;
  Mask bits = 0;

  SpinConfig() = default;
  SpinConfig(int n_spins, Mask mask);

  int spin(int i) const { return (bits >> i) & 1U ? -1 : 1; }
  std::string to_string() const;
  static SpinConfig parse(const std::string& text);
  SpinConfig flipped() const { return {n, ~bits & low_mask(n)}; }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;
};

/// Exact rational k / n.
struct Fraction {
  int num = 0;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
  friend bool operator==(const Fraction& a, const Fraction& b) {
    return static_cast<long>(a.num) * b.den == static_cast<long>(b.num) * a.den;
  }
};

/// R = (1/N) sum_i s1_i s2_i, as an exact fraction over N.
Fraction overlap(const SpinConfig& s1, const SpinConfig& s2);
/// Normalized Hamming distance d / N.
Fraction hamming(const SpinConfig& s1, const SpinConfig& s2);

/// The target overlap u_N = k / N of a coupled system, with optional window
/// half-width eps. Construction enforces k = N (mod 2), so the constrained set
/// {R = u_N} is never empty.
class OverlapConstraint {
 public:
  OverlapConstraint(int n, int k, double eps = 0.0);

  int n() const { return n_; }
  int k() const { return k_; }
  double eps() const { return eps_; }
  double u() const { return static_cast<double>(k_) / n_; }
  /// Number of disagreeing coordinates d = (N - k) / 2.
  int disagreements() const { return (n_ - k_) / 2; }

  OverlapConstraint with_eps(double eps) const { return {n_, k_, eps}; }
  /// True if pairs at Hamming count d have overlap within the window.
  bool window_contains(int d) const;
  std::vector<int> window_disagreements() const;

  nlohmann::json to_json() const;
  static OverlapConstraint from_json(const nlohmann::json& j);

 private:
  int n_;
  int k_;
  double eps_;
};

/// Closest admissible u_N = k / N to u (|u_N - u| <= 1/N). Ties go to the
/// smaller |k|, then to positive k.
OverlapConstraint nearest_admissible(int n, double u, double eps = 0.0);

/// card{(s1, s2) : R = u_N} = 2^N C(N, d).
std::uint64_t pair_count(const OverlapConstraint& c);
/// card{(s1, s2) : |R - u_N| <= eps}.
std::uint64_t window_pair_count(const OverlapConstraint& c);
std::uint64_t binomial(int n, int k);

/// Moves s2 onto {s : R(s1, s) = u_N} by flipping the lowest-index eligible
/// coordinates: agreeing ones when s2 is too close to s1, disagreeing ones when
/// too far. Requires |R(s1, s2) - u_N| <= eps.
SpinConfig project_pi(const SpinConfig& s1, const SpinConfig& s2, const OverlapConstraint& c);

struct FiberReport {
  std::uint64_t count = 0;
  /// 2^N exp(-N I(1 - eps)).
  double bound = 0.0;
  bool within_bound = false;
};

/// Counts s in the eps-window around s1 with project_pi(s1, s) == target.
FiberReport fiber_count(const SpinConfig& s1, const SpinConfig& target, const OverlapConstraint& c);

struct UPrimeResult {
  OverlapConstraint value;
  /// Every M <= m_max with (M u_M + N u'_N) / (M + N) = u_{M+N}.
  std::vector<int> recurrence;
};

/// Given numerators k_M of an admissible sequence u_M = k_M / M with
/// |u_M - u| <= 1/M, returns the most frequent N u'_N(M) = k_{M+N} - k_M over
/// M = 1..m_max (earliest first occurrence wins ties).
UPrimeResult construct_u_prime(int n, double u, const std::function<int(int)>& numerator,
                               int m_max);

}  // namespace sklab
