#include "sklab/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <type_traits>

#include "sklab/error.hpp"
#include "sklab/kernels.hpp"
#include "sklab/parallel.hpp"
#include "sklab/rng.hpp"

namespace sklab {
namespace {

constexpr int kSizeSplitMaxSpins = 16;

std::vector<double> disagreement_indicator(int n_lo, int d_lo, int n_hi, int d_hi) {
  const std::size_t size = std::size_t{1} << (n_lo + n_hi);
  const Mask lo = low_mask(n_lo);
  std::vector<double> s(size, 0.0);
  for (std::size_t m = 0; m < size; ++m) {
    const auto mask = static_cast<Mask>(m);
    if (popcount(mask & lo) == d_lo && popcount(mask >> n_lo) == d_hi) s[m] = 1.0;
  }
  return s;
}

double shift_exp(const std::vector<double>& e, std::vector<double>& t) {
  const double top = *std::max_element(e.begin(), e.end());
  t.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) t[i] = std::exp(e[i] - top);
  return top;
}

/// Copy marginals of the Gibbs measure t1(s1) t2(s2) 1_S(s1 ^ s2), normalized.
/// Returns log of the (shifted) partition sum.
double pair_marginals(const std::vector<double>& t1, const std::vector<double>& t2,
                      const std::vector<double>& indicator, std::vector<double>& p1, std::vector<double>& p2) {
  const std::vector<double> g2 = kernels::xor_correlate(indicator, t2);
  const std::vector<double> g1 = kernels::xor_correlate(indicator, t1);
  p1.resize(t1.size());
  p2.resize(t2.size());
  double z = 0.0;
  for (std::size_t s = 0; s < t1.size(); ++s) {
    p1[s] = t1[s] * std::max(g2[s], 0.0);
    p2[s] = t2[s] * std::max(g1[s], 0.0);
    z += p1[s];
  }
  double z2 = 0.0;
  for (double v : p2) z2 += v;
  for (double& v : p1) v /= z;
  for (double& v : p2) v /= z2;
  return std::log(z);
}

void check_grid(const std::vector<double>& grid, double step) {
  if (grid.empty()) throw PreconditionError("interpolation t-grid is empty");
  for (double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("interpolation t must lie in [0, 1]");
  }
  if (!(step > 0.0 && step <= 0.5)) throw DomainError("finite-difference step must lie in (0, 0.5]");
}

}  // namespace

double first_line_integrand(const MixtureSpec& spec, double u, double q) {
  return spec.xi(1, 2, u) - u * spec.xi_prime(1, 2, q) + spec.theta(1, 2, q);
}

SizeInterpolation::SizeInterpolation(MixtureSpec spec, OverlapConstraint c_m, OverlapConstraint c_n)
    : spec_(std::move(spec)), c_m_(c_m.with_eps(0.0)), c_n_(c_n.with_eps(0.0)) {
  require_convex(spec_, "size interpolation");
  if (c_m_.n() + c_n_.n() > kSizeSplitMaxSpins) {
    throw ResourceError("size interpolation enumerates Sigma_{M+N}^2 exactly; M + N must be at most " +
                        std::to_string(kSizeSplitMaxSpins));
  }
}

SizeInterpolation::Replica SizeInterpolation::draw(std::uint64_t replica_seed) const {
  Replica r;
  r.joint = sample_tensor(spec_, m() + n(), derive_seed(replica_seed, 1)).energy;
  r.left = sample_tensor(spec_, m(), derive_seed(replica_seed, 2)).energy;
  r.right = sample_tensor(spec_, n(), derive_seed(replica_seed, 3)).energy;
  return r;
}

std::array<std::vector<double>, 2> SizeInterpolation::energies(const Replica& r, double t) const {
  const int total = m() + n();
  const std::size_t size = std::size_t{1} << total;
  const Mask lo = low_mask(m());
  const double a = std::sqrt(t);
  const double b = std::sqrt(1.0 - t);
  std::array<std::vector<double>, 2> e;
  for (int l = 0; l < 2; ++l) {
    e[l].resize(size);
    const double h = spec_.field(l + 1);
    for (std::size_t s = 0; s < size; ++s) {
      const auto sigma = static_cast<Mask>(s);
      e[l][s] = a * r.joint[l][s] + b * (r.left[l][sigma & lo] + r.right[l][sigma >> m()]) +
                h * magnetization(sigma, total);
    }
  }
  return e;
}

double SizeInterpolation::phi(const Replica& r, double t) const {
  const auto e = energies(r, t);
  const auto part = split_overlap_partition(e[0], e[1], m(), n());
  return part.log_at(c_m_.disagreements(), c_n_.disagreements()) / (m() + n());
}

double SizeInterpolation::constrained_term() const {
  const double mm = m();
  const double nn = n();
  const double u_joint = (mm * c_m_.u() + nn * c_n_.u()) / (mm + nn);
  return (mm + nn) * spec_.xi(1, 2, u_joint) - mm * spec_.xi(1, 2, c_m_.u()) - nn * spec_.xi(1, 2, c_n_.u());
}

DerivativeParts SizeInterpolation::phi_prime(const Replica& r, double t) const {
  const auto e = energies(r, t);
  std::vector<double> t1, t2, p1, p2;
  shift_exp(e[0], t1);
  shift_exp(e[1], t2);
  const auto indicator = disagreement_indicator(m(), c_m_.disagreements(), n(), c_n_.disagreements());
  pair_marginals(t1, t2, indicator, p1, p2);
  const std::vector<double>* marg[2] = {&p1, &p2};
  const double mm = m();
  const double nn = n();
  double convexity = 0.0;
  for (int l = 1; l <= 2; ++l) {
    for (int lp = 1; lp <= 2; ++lp) {
      const auto prof = kernels::split_hamming_profile(*marg[l - 1], *marg[lp - 1], m(), n());
      for (int dl = 0; dl <= m(); ++dl) {
        for (int dh = 0; dh <= n(); ++dh) {
          const double c = (mm + nn) * spec_.xi(l, lp, 1.0 - 2.0 * (dl + dh) / (mm + nn)) -
                           mm * spec_.xi(l, lp, 1.0 - 2.0 * dl / mm) - nn * spec_.xi(l, lp, 1.0 - 2.0 * dh / nn);
          convexity += 0.5 * prof[static_cast<std::size_t>(dl * (n() + 1) + dh)] * c;
        }
      }
    }
  }
  return {constrained_term() / (mm + nn), -convexity / (mm + nn)};
}

double SizeInterpolation::separate_endpoint(const Replica& r) const {
  const auto left = overlap_partition(field_energies(r.left[0], spec_.field(1), m()),
                                      field_energies(r.left[1], spec_.field(2), m()), m());
  const auto right = overlap_partition(field_energies(r.right[0], spec_.field(1), n()),
                                       field_energies(r.right[1], spec_.field(2), n()), n());
  return (left.log_at(c_m_) + right.log_at(c_n_)) / (m() + n());
}

double SizeInterpolation::joint_endpoint(const Replica& r) const {
  const int total = m() + n();
  const auto part = split_overlap_partition(field_energies(r.joint[0], spec_.field(1), total),
                                            field_energies(r.joint[1], spec_.field(2), total), m(), n());
  return part.log_at(c_m_.disagreements(), c_n_.disagreements()) / total;
}

StructureInterpolation::StructureInterpolation(RostSpec rost, MixtureSpec spec, OverlapConstraint c)
    : spec_(std::move(spec)), rost_(std::move(rost)), c_(c.with_eps(0.0)), sampler_(rost_, spec_) {
  require_convex(spec_, "structure interpolation");
}

StructureInterpolation::Replica StructureInterpolation::draw(std::uint64_t replica_seed) const {
  Replica r;
  Engine weights_engine(derive_seed(replica_seed, 1));
  r.log_weights = draw_log_weights(rost_.weights(), rost_.size(), weights_engine);
  r.fields = sampler_.sample(n(), derive_seed(replica_seed, 2));
  r.table = sample_tensor(spec_, n(), derive_seed(replica_seed, 3));
  return r;
}

namespace {

/// Energies of copy l for element alpha at time t, excluding the alpha-only
/// y term.
std::vector<double> structure_energy(const StructureInterpolation::Replica& r, const MixtureSpec& spec, int l,
                                     int alpha, double t) {
  const int n = r.table.n;
  const std::size_t size = std::size_t{1} << n;
  const double a = std::sqrt(t);
  const double b = std::sqrt(1.0 - t);
  const double h = spec.field(l);
  const auto& hv = r.table.values(l);
  std::vector<double> e(size);
  for (std::size_t s = 0; s < size; ++s) {
    const auto sigma = static_cast<Mask>(s);
    double cavity = 0.0;
    for (int i = 0; i < n; ++i) cavity += ((sigma >> i) & 1U ? -1.0 : 1.0) * r.fields.z_at(l, i, alpha);
    e[s] = a * hv[s] + b * cavity + h * magnetization(sigma, n);
  }
  return e;
}

}  // namespace

double StructureInterpolation::phi(const Replica& r, double t) const {
  const int size = rost_.size();
  const double root = std::sqrt(t) * std::sqrt(static_cast<double>(n()));
  std::vector<double> terms(static_cast<std::size_t>(size));
  for (int alpha = 0; alpha < size; ++alpha) {
    const auto part =
        overlap_partition(structure_energy(r, spec_, 1, alpha, t), structure_energy(r, spec_, 2, alpha, t), n());
    terms[alpha] = r.log_weights[alpha] + root * (r.fields.y_at(1, alpha) + r.fields.y_at(2, alpha)) +
                   part.log_at(c_);
  }
  return log_sum_exp(terms) / n();
}

DerivativeParts StructureInterpolation::phi_prime(const Replica& r, double t) const {
  const int size = rost_.size();
  if (size > kRostPairBudget) {
    throw ResourceError("two-replica enumeration over " + std::to_string(size) +
                        " structure elements exceeds the budget of " + std::to_string(kRostPairBudget) +
                        "; use a smaller structure");
  }
  const int nn = n();
  const std::size_t states = std::size_t{1} << nn;
  const double root = std::sqrt(t) * std::sqrt(static_cast<double>(nn));
  const auto indicator = disagreement_indicator(nn, c_.disagreements(), 0, 0);
  // Per element: transformed copy marginals and log weight.
  std::vector<std::array<std::vector<double>, 2>> spectra(static_cast<std::size_t>(size));
  std::vector<double> log_pi(static_cast<std::size_t>(size));
  std::vector<double> t1, t2, p1, p2;
  for (int alpha = 0; alpha < size; ++alpha) {
    const auto e1 = structure_energy(r, spec_, 1, alpha, t);
    const auto e2 = structure_energy(r, spec_, 2, alpha, t);
    const double shift = shift_exp(e1, t1) + shift_exp(e2, t2);
    const double log_z = pair_marginals(t1, t2, indicator, p1, p2) + shift;
    log_pi[alpha] = r.log_weights[alpha] + root * (r.fields.y_at(1, alpha) + r.fields.y_at(2, alpha)) + log_z;
    kernels::walsh_hadamard(p1);
    kernels::walsh_hadamard(p2);
    spectra[alpha] = {p1, p2};
  }
  const double norm = log_sum_exp(log_pi);
  std::vector<double> pi(static_cast<std::size_t>(size));
  for (int alpha = 0; alpha < size; ++alpha) pi[alpha] = std::exp(log_pi[alpha] - norm);

  DerivativeParts out;
  const double u = c_.u();
  for (int alpha = 0; alpha < size; ++alpha) {
    out.first += pi[alpha] * first_line_integrand(spec_, u, rost_.q_at(1, 2, alpha, alpha));
  }

  std::vector<double> prod(states);
  std::vector<double> overlap_of(states);
  for (std::size_t m = 0; m < states; ++m) {
    overlap_of[m] = 1.0 - 2.0 * popcount(static_cast<Mask>(m)) / nn;
  }
  double second = 0.0;
  for (int alpha = 0; alpha < size; ++alpha) {
    for (int beta = 0; beta < size; ++beta) {
      const double w = pi[alpha] * pi[beta];
      if (w == 0.0) continue;
      for (int l = 1; l <= 2; ++l) {
        for (int lp = 1; lp <= 2; ++lp) {
          const auto& a = spectra[alpha][l - 1];
          const auto& b = spectra[beta][lp - 1];
          for (std::size_t k = 0; k < states; ++k) prod[k] = a[k] * b[k];
          kernels::walsh_hadamard(prod);
          double mean_xi = 0.0;
          double mean_r = 0.0;
          for (std::size_t m = 0; m < states; ++m) {
            const double c = prod[m] / static_cast<double>(states);
            mean_xi += c * spec_.xi(l, lp, overlap_of[m]);
            mean_r += c * overlap_of[m];
          }
          const double q = rost_.q_at(l, lp, alpha, beta);
          second += w * (mean_xi - mean_r * spec_.xi_prime(l, lp, q) + spec_.theta(l, lp, q));
        }
      }
    }
  }
  out.second = -0.5 * second;
  return out;
}

double StructureInterpolation::cavity_endpoint(const Replica& r) const {
  return g_functional(r.log_weights, r.fields, spec_.field(1), spec_.field(2), c_).term1;
}

double StructureInterpolation::decoupled_endpoint(const Replica& r) const {
  const auto part = partition_by_overlap(r.table, spec_.field(1), spec_.field(2));
  return part.log_at(c_) / n() + g_functional(r.log_weights, r.fields, spec_.field(1), spec_.field(2), c_).term2;
}

double StructureInterpolation::first_line_bound() const {
  double worst = 0.0;
  for (int alpha = 0; alpha < rost_.size(); ++alpha) {
    worst = std::max(worst, std::abs(first_line_integrand(spec_, c_.u(), rost_.q_at(1, 2, alpha, alpha))));
  }
  return worst;
}

std::string to_string(InterpolationKind kind) {
  return kind == InterpolationKind::size_split ? "size_split" : "structure";
}

namespace {

double sigmas(double diff, double sigma) {
  if (sigma > 0.0) return diff / sigma;
  if (std::abs(diff) <= 1e-12) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

struct ReplicaTrace {
  std::vector<double> phi, fd, first, second;
  double endpoint_error = 0.0;
  double increment = 0.0;
};

template <class Interp>
InterpolationRun run_curves(const Interp& ip, InterpolationKind kind, std::array<int, 2> sizes,
                            const std::vector<double>& grid, int n_rep, std::uint64_t seed, double step) {
  check_grid(grid, step);
  if (n_rep < 2) throw PreconditionError("interpolation runs need n_rep >= 2");
  const std::vector<ReplicaTrace> traces = map_replicas<ReplicaTrace>(n_rep, [&](int rep) {
    const auto r = ip.draw(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    ReplicaTrace tr;
    for (double t : grid) {
      const double here = ip.phi(r, t);
      double fd;
      if (t - step < 0.0) {
        fd = (ip.phi(r, t + step) - here) / step;
      } else if (t + step > 1.0) {
        fd = (here - ip.phi(r, t - step)) / step;
      } else {
        fd = (ip.phi(r, t + step) - ip.phi(r, t - step)) / (2.0 * step);
      }
      const DerivativeParts d = ip.phi_prime(r, t);
      tr.phi.push_back(here);
      tr.fd.push_back(fd);
      tr.first.push_back(d.first);
      tr.second.push_back(d.second);
    }
    double lo_end, hi_end;
    if constexpr (std::is_same_v<Interp, SizeInterpolation>) {
      lo_end = ip.separate_endpoint(r);
      hi_end = ip.joint_endpoint(r);
    } else {
      lo_end = ip.cavity_endpoint(r);
      hi_end = ip.decoupled_endpoint(r);
    }
    const double phi0 = ip.phi(r, 0.0);
    const double phi1 = ip.phi(r, 1.0);
    tr.endpoint_error = std::max(std::abs(phi0 - lo_end), std::abs(phi1 - hi_end));
    tr.increment = phi1 - phi0;
    return tr;
  });

  InterpolationRun run;
  run.kind = kind;
  run.sizes = sizes;
  run.step = step;
  std::vector<double> col(static_cast<std::size_t>(n_rep));
  auto column = [&](auto member, std::size_t j, const char* label) {
    for (int rep = 0; rep < n_rep; ++rep) col[rep] = (traces[rep].*member)[j];
    return summarize(col, seed, label);
  };
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CurvePoint p;
    p.t = grid[j];
    p.phi = column(&ReplicaTrace::phi, j, "phi");
    p.d_fd = column(&ReplicaTrace::fd, j, "d_fd");
    p.first = column(&ReplicaTrace::first, j, "first");
    p.second = column(&ReplicaTrace::second, j, "second");
    for (int rep = 0; rep < n_rep; ++rep) col[rep] = traces[rep].first[j] + traces[rep].second[j];
    p.d_gibbs = summarize(col, seed, "d_gibbs");
    run.points.push_back(std::move(p));
  }
  for (int rep = 0; rep < n_rep; ++rep) {
    run.endpoint_error = std::max(run.endpoint_error, traces[rep].endpoint_error);
    col[rep] = traces[rep].increment;
  }
  run.increment = summarize(col, seed, "increment");
  return run;
}

}  // namespace

double InterpolationRun::worst_derivative_sigmas() const {
  double worst = 0.0;
  for (const auto& p : points) {
    worst = std::max(worst, std::abs(sigmas(p.d_fd.mean - p.d_gibbs.mean, combined_sigma(p.d_fd, p.d_gibbs))));
  }
  return worst;
}

double InterpolationRun::worst_second_line_sigmas() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) worst = std::max(worst, sigmas(p.second.mean, p.second.std_error));
  return worst;
}

std::string InterpolationRun::to_csv() const {
  std::ostringstream out;
  out << "t,mean,stderr,d_fd,d_gibbs\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.t, p.phi.mean, p.phi.std_error,
                  p.d_fd.mean, p.d_gibbs.mean);
    out << buf;
  }
  return out.str();
}

InterpolationRun run_size_interpolation(const MixtureSpec& spec, const OverlapConstraint& c_m,
                                        const OverlapConstraint& c_n, const std::vector<double>& t_grid,
                                        int n_rep, std::uint64_t seed, double step) {
  const SizeInterpolation ip(spec, c_m, c_n);
  return run_curves(ip, InterpolationKind::size_split, {c_m.n(), c_n.n()}, t_grid, n_rep, seed, step);
}

InterpolationRun run_structure_interpolation(const RostSpec& rost, const MixtureSpec& spec,
                                             const OverlapConstraint& c, const std::vector<double>& t_grid,
                                             int n_rep, std::uint64_t seed, double step) {
  const StructureInterpolation ip(rost, spec, c);
  return run_curves(ip, InterpolationKind::structure, {rost.size(), c.n()}, t_grid, n_rep, seed, step);
}

}  // namespace sklab
