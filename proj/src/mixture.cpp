#include "sklab/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "sklab/error.hpp"

namespace sklab {
namespace {

constexpr double kDomainSlack = 1e-12;

void check_copy(int l) {
  if (l != 1 && l != 2) throw DomainError("copy index must be 1 or 2, got " + std::to_string(l));
}

double check_x(double x) {
  if (!(std::abs(x) <= 1.0 + kDomainSlack)) {
    std::ostringstream os;
    os << "mixture functions are defined on [-1, 1], got x = " << x;
    throw DomainError(os.str());
  }
  return std::clamp(x, -1.0, 1.0);
}

}  // namespace

MixtureSpec::MixtureSpec(std::vector<double> a1, std::vector<double> a2, double h1, double h2)
    : a_{std::move(a1), std::move(a2)}, h_{h1, h2} {
  const std::size_t p_max = std::max({a_[0].size(), a_[1].size(), std::size_t{1}});
  for (auto& a : a_) {
    a.resize(p_max, 0.0);
    for (double c : a) {
      if (!std::isfinite(c)) throw InputError("mixture coefficients must be finite");
    }
  }
  if (!std::isfinite(h1) || !std::isfinite(h2)) throw InputError("external fields must be finite");

  const ConvexityReport report = check_convexity(*this);
  if (!report.convex) {
    std::clog << "warning: mixture is not convex on [-1,1] (pair (" << report.worst_pair[0] << ","
              << report.worst_pair[1] << ") near x = " << report.worst_x
              << "); theorem checks will refuse to run\n";
  }
}

MixtureSpec MixtureSpec::symmetric(std::vector<double> a, double h1, double h2) {
  return MixtureSpec(a, a, h1, h2);
}

MixtureSpec MixtureSpec::pure(int p, double amplitude, double h1, double h2) {
  if (p < 1) throw DomainError("p must be >= 1");
  std::vector<double> a(static_cast<std::size_t>(p), 0.0);
  a.back() = amplitude;
  return symmetric(std::move(a), h1, h2);
}

double MixtureSpec::coeff(int l, int p) const {
  check_copy(l);
  if (p < 1 || p > p_max()) return 0.0;
  return a_[l - 1][p - 1];
}

const std::vector<double>& MixtureSpec::coeffs(int l) const {
  check_copy(l);
  return a_[l - 1];
}

double MixtureSpec::field(int l) const {
  check_copy(l);
  return h_[l - 1];
}

bool MixtureSpec::is_zero() const {
  for (const auto& a : a_) {
    if (std::any_of(a.begin(), a.end(), [](double c) { return c != 0.0; })) return false;
  }
  return true;
}

double MixtureSpec::xi(int l, int lp, double x) const {
  check_copy(l);
  check_copy(lp);
  x = check_x(x);
  // Horner on sum_{p>=1} c_p x^p.
  double acc = 0.0;
  for (int p = p_max(); p >= 1; --p) acc = (acc + a_[l - 1][p - 1] * a_[lp - 1][p - 1]) * x;
  return acc;
}

double MixtureSpec::xi_prime(int l, int lp, double x) const {
  check_copy(l);
  check_copy(lp);
  x = check_x(x);
  double acc = 0.0;
  for (int p = p_max(); p >= 1; --p) acc = acc * x + p * a_[l - 1][p - 1] * a_[lp - 1][p - 1];
  return acc;
}

double MixtureSpec::xi_second(int l, int lp, double x) const {
  check_copy(l);
  check_copy(lp);
  x = check_x(x);
  double acc = 0.0;
  for (int p = p_max(); p >= 2; --p) {
    acc = acc * x + p * (p - 1) * a_[l - 1][p - 1] * a_[lp - 1][p - 1];
  }
  return acc;
}

double MixtureSpec::theta(int l, int lp, double x) const {
  return x * xi_prime(l, lp, x) - xi(l, lp, x);
}

nlohmann::json MixtureSpec::to_json() const {
  return {{"a1", a_[0]}, {"a2", a_[1]}, {"h1", h_[0]}, {"h2", h_[1]}};
}

MixtureSpec MixtureSpec::from_json(const nlohmann::json& j) {
  try {
    return MixtureSpec(j.at("a1").get<std::vector<double>>(), j.at("a2").get<std::vector<double>>(),
                       j.value("h1", 0.0), j.value("h2", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed mixture spec: ") + e.what());
  }
}

double eval_xi(const MixtureSpec& spec, int l, int lp, double x) { return spec.xi(l, lp, x); }
double eval_theta(const MixtureSpec& spec, int l, int lp, double x) {
  return spec.theta(l, lp, x);
}

ConvexityReport check_convexity(const MixtureSpec& spec, int grid_size, double tol) {
  if (grid_size < 3) throw DomainError("convexity grid needs at least 3 points");
  ConvexityReport report;
  report.worst_second_difference = std::numeric_limits<double>::infinity();
  const double h = 2.0 / (grid_size - 1);
  for (const auto& [l, lp] : kCopyPairs) {
    double prev2 = spec.xi(l, lp, -1.0);
    double prev1 = spec.xi(l, lp, -1.0 + h);
    for (int i = 2; i < grid_size; ++i) {
      const double x = (i == grid_size - 1) ? 1.0 : -1.0 + i * h;
      const double cur = spec.xi(l, lp, x);
      const double diff = prev2 - 2.0 * prev1 + cur;
      if (diff < report.worst_second_difference) {
        report.worst_second_difference = diff;
        report.worst_pair = {l, lp};
        report.worst_x = x - h;
      }
      prev2 = prev1;
      prev1 = cur;
    }
  }
  report.convex = report.worst_second_difference >= -tol;

  report.structural = true;
  for (int p = 1; p <= spec.p_max(); ++p) {
    const double c1 = spec.coeff(1, p);
    const double c2 = spec.coeff(2, p);
    if (p % 2 == 1 && (c1 != 0.0 || c2 != 0.0)) report.structural = false;
    if (p % 2 == 0 && c1 * c2 < 0.0) report.structural = false;
  }
  return report;
}

void require_convex(const MixtureSpec& spec, const std::string& context) {
  const ConvexityReport report = check_convexity(spec);
  if (report.convex) return;
  std::ostringstream os;
  os << context << " requires convex xi; xi_{" << report.worst_pair[0] << ","
     << report.worst_pair[1] << "} has second difference " << report.worst_second_difference
     << " at x = " << report.worst_x;
  throw StructuralError(os.str());
}

double PositivityReport::overall_minimum() const {
  return *std::min_element(minimum.begin(), minimum.end());
}

PositivityReport check_positivity(const MixtureSpec& spec, int grid_size) {
  require_convex(spec, "check_positivity");
  if (grid_size < 2) throw DomainError("positivity grid needs at least 2 points");
  PositivityReport report;
  const double h = 2.0 / (grid_size - 1);
  auto grid = [&](int i) { return i == grid_size - 1 ? 1.0 : -1.0 + i * h; };
  for (std::size_t pair = 0; pair < kCopyPairs.size(); ++pair) {
    const auto [l, lp] = kCopyPairs[pair];
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid_size; ++j) {
      const double y = grid(j);
      const double slope = spec.xi_prime(l, lp, y);
      const double th = spec.theta(l, lp, y);
      for (int i = 0; i < grid_size; ++i) {
        const double x = grid(i);
        const double v = spec.xi(l, lp, x) - x * slope + th;
        if (v < best) {
          best = v;
          report.argmin[pair] = {x, y};
        }
      }
    }
    report.minimum[pair] = best;
  }
  return report;
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << "binary_entropy is defined on [0, 1], got " << x;
    throw DomainError(os.str());
  }
  auto xlogx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
  return 0.5 * (xlogx(1.0 + x) + xlogx(1.0 - x));
}

}  // namespace sklab
