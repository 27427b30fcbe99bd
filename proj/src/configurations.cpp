#include "sklab/configurations.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <sstream>

#include "sklab/error.hpp"
#include "sklab/mixture.hpp"

namespace sklab {
namespace {

constexpr double kWindowSlack = 1e-9;

void require_same_length(const SpinConfig& a, const SpinConfig& b) {
  if (a.n != b.n) {
    throw PreconditionError("configurations have different lengths " + std::to_string(a.n) +
                            " and " + std::to_string(b.n));
  }
}

}  // namespace

int popcount(Mask m) { return std::popcount(m); }

SpinConfig::SpinConfig(int n_spins, Mask mask) : n(n_spins), bits(mask) {
  if (n < 1 || n > kMaxSpins) {
    throw ResourceError("configuration length must be in [1, " + std::to_string(kMaxSpins) + "]");
  }
  if ((mask & ~low_mask(n)) != 0) throw InputError("mask has bits above position n-1");
}

std::string SpinConfig::to_string() const {
  std::string s(static_cast<std::size_t>(n), '+');
  for (int i = 0; i < n; ++i) {
    if (spin(i) < 0) s[static_cast<std::size_t>(n - 1 - i)] = '-';
  }
  return s;
}

SpinConfig SpinConfig::parse(const std::string& text) {
  const int n = static_cast<int>(text.size());
  Mask bits = 0;
  for (int pos = 0; pos < n; ++pos) {
    const char ch = text[static_cast<std::size_t>(pos)];
    if (ch == '-') {
      bits |= Mask{1} << (n - 1 - pos);
    } else if (ch != '+') {
      throw InputError("spin strings use '+' and '-', got '" + text + "'");
    }
  }
  return {n, bits};
}

Fraction overlap(const SpinConfig& s1, const SpinConfig& s2) {
  require_same_length(s1, s2);
  return {s1.n - 2 * popcount(s1.bits ^ s2.bits), s1.n};
}

Fraction hamming(const SpinConfig& s1, const SpinConfig& s2) {
  require_same_length(s1, s2);
  return {popcount(s1.bits ^ s2.bits), s1.n};
}

OverlapConstraint::OverlapConstraint(int n, int k, double eps) : n_(n), k_(k), eps_(eps) {
  if (n < 1) throw DomainError("constraint needs n >= 1");
  if (k < -n || k > n) {
    throw DomainError("overlap numerator k = " + std::to_string(k) + " outside [-n, n]");
  }
  if ((n - k) % 2 != 0) {
    throw StructuralError("u_N = " + std::to_string(k) + "/" + std::to_string(n) +
                          " is not an attainable overlap: k and N must have equal parity");
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("window half-width must be >= 0");
}

bool OverlapConstraint::window_contains(int d) const {
  if (d < 0 || d > n_) return false;
  return std::abs((n_ - 2 * d) - k_) <= eps_ * n_ + kWindowSlack;
}

std::vector<int> OverlapConstraint::window_disagreements() const {
  std::vector<int> ds;
  for (int d = 0; d <= n_; ++d) {
    if (window_contains(d)) ds.push_back(d);
  }
  return ds;
}

nlohmann::json OverlapConstraint::to_json() const { return {{"n", n_}, {"k", k_}, {"eps", eps_}}; }

OverlapConstraint OverlapConstraint::from_json(const nlohmann::json& j) {
  try {
    return {j.at("n").get<int>(), j.at("k").get<int>(), j.value("eps", 0.0)};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed constraint: ") + e.what());
  }
}

OverlapConstraint nearest_admissible(int n, double u, double eps) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (!(std::abs(u) <= 1.0)) throw DomainError("target overlap must lie in [-1, 1]");
  int best = n;
  double best_gap = std::abs(1.0 - u);
  for (int k = n - 2; k >= -n; k -= 2) {
    const double gap = std::abs(static_cast<double>(k) / n - u);
    const bool closer = gap < best_gap - 1e-15;
    const bool tie = std::abs(gap - best_gap) <= 1e-15;
    if (closer || (tie && (std::abs(k) < std::abs(best) || (std::abs(k) == std::abs(best) && k > best)))) {
      best = k;
      best_gap = gap;
    }
  }
  return {n, best, eps};
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

std::uint64_t pair_count(const OverlapConstraint& c) {
  if (c.n() > kMaxSpins) throw ResourceError("pair_count supports n <= 20");
  return (std::uint64_t{1} << c.n()) * binomial(c.n(), c.disagreements());
}

std::uint64_t window_pair_count(const OverlapConstraint& c) {
  if (c.n() > kMaxSpins) throw ResourceError("window_pair_count supports n <= 20");
  std::uint64_t total = 0;
  for (int d : c.window_disagreements()) total += binomial(c.n(), d);
  return (std::uint64_t{1} << c.n()) * total;
}

SpinConfig project_pi(const SpinConfig& s1, const SpinConfig& s2, const OverlapConstraint& c) {
  require_same_length(s1, s2);
  if (s1.n != c.n()) throw PreconditionError("constraint length differs from configuration length");
  const Mask diff = s1.bits ^ s2.bits;
  const int d = popcount(diff);
  if (!c.window_contains(d)) {
    std::ostringstream os;
    os << "pair with overlap " << overlap(s1, s2).value() << " lies outside the window ["
       << c.u() - c.eps() << ", " << c.u() + c.eps() << "]";
    throw PreconditionError(os.str());
  }
  const int target = c.disagreements();
  // Flip agreeing coordinates to add disagreements, disagreeing ones to remove them.
  Mask eligible = d < target ? (~diff & low_mask(s1.n)) : diff;
  int flips = std::abs(target - d);
  Mask out = s2.bits;
  while (flips-- > 0) {
    const Mask lowest = eligible & (~eligible + 1);
    out ^= lowest;
    eligible ^= lowest;
  }
  return {s1.n, out};
}

FiberReport fiber_count(const SpinConfig& s1, const SpinConfig& target, const OverlapConstraint& c) {
  require_same_length(s1, target);
  if (!(overlap(s1, target) == Fraction{c.k(), c.n()})) {
    throw PreconditionError("fiber target must satisfy R(s1, target) = u_N exactly");
  }
  FiberReport report;
  const Mask end = Mask{1} << s1.n;
  for (Mask s = 0; s < end; ++s) {
    if (!c.window_contains(popcount(s1.bits ^ s))) continue;
    if (project_pi(s1, SpinConfig{s1.n, s}, c).bits == target.bits) ++report.count;
  }
  const double eps = std::min(c.eps(), 1.0);
  report.bound = std::ldexp(std::exp(-s1.n * binary_entropy(1.0 - eps)), s1.n);
  report.within_bound = static_cast<double>(report.count) <= report.bound * (1.0 + 1e-12);
  return report;
}

UPrimeResult construct_u_prime(int n, double u, const std::function<int(int)>& numerator,
                               int m_max) {
  if (n < 1 || m_max < 1) throw DomainError("construct_u_prime needs n, m_max >= 1");
  for (int m = 1; m <= m_max + n; ++m) {
    const int k = numerator(m);
    if (std::abs(k) > m || (m - k) % 2 != 0 ||
        std::abs(static_cast<double>(k) / m - u) > 1.0 / m + 1e-12) {
      throw PreconditionError("base sequence violates |u_M - u| <= 1/M (or parity) at M = " +
                              std::to_string(m));
    }
  }
  std::map<int, std::vector<int>> hits;
  std::vector<int> first_seen;
  for (int m = 1; m <= m_max; ++m) {
    const int value = numerator(m + n) - numerator(m);
    auto& list = hits[value];
    if (list.empty()) first_seen.push_back(value);
    list.push_back(m);
  }
  int best = first_seen.front();
  for (int v : first_seen) {
    if (hits[v].size() > hits[best].size()) best = v;
  }
  if (hits[best].size() < 2) {
    throw SearchExhaustedError("no value of N u'_N(M) repeats within M <= " + std::to_string(m_max));
  }
  OverlapConstraint value(n, best);
  if (std::abs(value.u() - u) > 2.0 / n + 1e-12) {
    throw StructuralError("u'_N lies farther than 2/N from u");
  }
  return {value, hits[best]};
}

}  // namespace sklab
