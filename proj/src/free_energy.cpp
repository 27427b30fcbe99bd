#include "sklab/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sklab/error.hpp"
#include "sklab/kernels.hpp"
#include "sklab/parallel.hpp"
#include "sklab/rng.hpp"

namespace sklab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_table(std::span<const double> e, int n, const char* what) {
  if (n < 1 || n > kMaxSpins) throw DomainError(std::string(what) + ": N out of range");
  if (e.size() != (std::size_t{1} << n)) throw DomainError(std::string(what) + ": table size is not 2^N");
  for (double v : e) {
    if (!std::isfinite(v)) throw InputError(std::string(what) + ": non-finite energy");
  }
}

/// exp(e - max e), returning the shift.
double shifted_weights(std::span<const double> e, std::vector<double>& t) {
  const double shift = *std::max_element(e.begin(), e.end());
  t.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) t[i] = std::exp(e[i] - shift);
  return shift;
}

bool all_positive(const std::vector<double>& z) {
  return std::all_of(z.begin(), z.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

}  // namespace

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

double log_two_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax));
}

std::vector<double> field_energies(std::span<const double> hamiltonian, double field, int n) {
  std::vector<double> out(hamiltonian.begin(), hamiltonian.end());
  if (field != 0.0) {
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += field * magnetization(static_cast<Mask>(s), n);
  }
  return out;
}

double OverlapResolvedPartition::log_at(const OverlapConstraint& c) const {
  if (c.n() != n) throw PreconditionError("constraint N differs from partition N");
  return log_at(c.disagreements());
}

double OverlapResolvedPartition::log_window(const OverlapConstraint& c) const {
  if (c.n() != n) throw PreconditionError("constraint N differs from partition N");
  std::vector<double> terms;
  for (int d : c.window_disagreements()) terms.push_back(log_at(d));
  return log_sum_exp(terms);
}

double OverlapResolvedPartition::log_total() const { return log_sum_exp(log_z); }

OverlapResolvedPartition overlap_partition(std::span<const double> e1, std::span<const double> e2, int n,
                                           OverlapEngine engine) {
  require_table(e1, n, "overlap_partition");
  require_table(e2, n, "overlap_partition");
  std::vector<double> t1, t2;
  const double shift = shifted_weights(e1, t1) + shifted_weights(e2, t2);
  std::vector<double> z;
  switch (engine) {
    case OverlapEngine::walsh_hadamard:
      z = kernels::hamming_profile(t1, t2, n);
      if (!all_positive(z)) z = kernels::hamming_profile_layered(t1, t2, n);
      break;
    case OverlapEngine::layered:
      z = kernels::hamming_profile_layered(t1, t2, n);
      break;
    case OverlapEngine::brute_force:
      z = kernels::serial::hamming_profile(t1, t2, n);
      break;
  }
  OverlapResolvedPartition out;
  out.n = n;
  out.log_z.resize(z.size());
  for (std::size_t d = 0; d < z.size(); ++d) out.log_z[d] = safe_log(z[d]) + shift;
  return out;
}

OverlapResolvedPartition partition_by_overlap(const HamiltonianTable& table, double h1, double h2,
                                              OverlapEngine engine) {
  const std::vector<double> e1 = field_energies(table.values(1), h1, table.n);
  const std::vector<double> e2 = field_energies(table.values(2), h2, table.n);
  return overlap_partition(e1, e2, table.n, engine);
}

SplitOverlapPartition split_overlap_partition(std::span<const double> e1, std::span<const double> e2,
                                              int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi < 1) throw DomainError("split_overlap_partition: both parts need a spin");
  require_table(e1, n_lo + n_hi, "split_overlap_partition");
  require_table(e2, n_lo + n_hi, "split_overlap_partition");
  std::vector<double> t1, t2;
  const double shift = shifted_weights(e1, t1) + shifted_weights(e2, t2);
  const std::vector<double> z = kernels::split_hamming_profile(t1, t2, n_lo, n_hi);
  SplitOverlapPartition out;
  out.n_lo = n_lo;
  out.n_hi = n_hi;
  out.log_z.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out.log_z[i] = safe_log(z[i]) + shift;
  return out;
}

std::vector<double> inner_cavity_profile(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("inner_cavity_profile: field lengths differ");
  const auto add = [](double x, double y) {
    if (x == kNegInf) return y;
    if (y == kNegInf) return x;
    const double hi = std::max(x, y);
    return hi + std::log1p(std::exp(-std::abs(x - y)));
  };
  std::vector<double> log_poly(a.size() + 1, kNegInf);
  log_poly[0] = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw InputError("inner_cavity_profile: non-finite field");
    const double agree = log_two_cosh(a[i] + b[i]);
    const double disagree = log_two_cosh(a[i] - b[i]);
    for (std::size_t j = i + 1; j > 0; --j) {
      log_poly[j] = add(log_poly[j] + agree, log_poly[j - 1] + disagree);
    }
    log_poly[0] += agree;
  }
  return log_poly;
}

double inner_cavity_sum(std::span<const double> a, std::span<const double> b, const OverlapConstraint& c) {
  if (static_cast<int>(a.size()) != c.n()) throw PreconditionError("inner_cavity_sum: field length differs from N");
  return inner_cavity_profile(a, b)[static_cast<std::size_t>(c.disagreements())];
}

std::vector<OverlapResolvedPartition> sample_partitions(const MixtureSpec& spec, int n, int n_rep,
                                                        std::uint64_t seed, SamplerKind kind) {
  if (n_rep < 1) throw PreconditionError("sample_partitions needs n_rep >= 1");
  const TableSampler sampler(spec, n, kind);
  return map_replicas<OverlapResolvedPartition>(n_rep, [&](int r) {
    return partition_by_overlap(sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r))), spec.field(1),
                                spec.field(2));
  });
}

namespace {

template <class F>
Estimate estimate_from_partitions(const MixtureSpec& spec, int n, int n_rep, std::uint64_t seed, SamplerKind kind,
                                  std::string label, F&& reduce) {
  if (n_rep < 2) throw PreconditionError("free energy estimates need n_rep >= 2");
  const TableSampler sampler(spec, n, kind);
  const std::vector<double> values = map_replicas<double>(n_rep, [&](int r) {
    const auto part = partition_by_overlap(sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r))),
                                           spec.field(1), spec.field(2));
    return reduce(part) / n;
  });
  return summarize(values, seed, std::move(label));
}

}  // namespace

Estimate estimate_F(const MixtureSpec& spec, int n, const OverlapConstraint& c, int n_rep, std::uint64_t seed,
                    SamplerKind kind) {
  if (c.n() != n) throw PreconditionError("estimate_F: constraint N differs from N");
  if (c.eps() != 0.0) throw PreconditionError("estimate_F: use estimate_F_window for eps > 0");
  return estimate_from_partitions(spec, n, n_rep, seed, kind, "F",
                                  [&](const OverlapResolvedPartition& p) { return p.log_at(c); });
}

Estimate estimate_F_window(const MixtureSpec& spec, int n, const OverlapConstraint& c, int n_rep,
                           std::uint64_t seed, SamplerKind kind) {
  if (c.n() != n) throw PreconditionError("estimate_F_window: constraint N differs from N");
  return estimate_from_partitions(spec, n, n_rep, seed, kind, "F_window",
                                  [&](const OverlapResolvedPartition& p) { return p.log_window(c); });
}

GTerms g_functional(std::span<const double> log_weights, const CavityFieldSample& fields, double h1, double h2,
                    const OverlapConstraint& c) {
  const int n = fields.n_sites;
  const int size = fields.size;
  if (c.n() != n) throw PreconditionError("g_functional: constraint N differs from the number of sites");
  if (static_cast<int>(log_weights.size()) != size) throw PreconditionError("g_functional: weight count mismatch");
  std::vector<double> first(static_cast<std::size_t>(size));
  std::vector<double> second(static_cast<std::size_t>(size));
  std::vector<double> a(static_cast<std::size_t>(n));
  std::vector<double> b(static_cast<std::size_t>(n));
  const double root_n = std::sqrt(static_cast<double>(n));
  for (int alpha = 0; alpha < size; ++alpha) {
    for (int i = 0; i < n; ++i) {
      a[i] = fields.z_at(1, i, alpha) + h1;
      b[i] = fields.z_at(2, i, alpha) + h2;
    }
    first[alpha] = log_weights[alpha] + inner_cavity_sum(a, b, c);
    second[alpha] = log_weights[alpha] + root_n * (fields.y_at(1, alpha) + fields.y_at(2, alpha));
  }
  return {log_sum_exp(first) / n, log_sum_exp(second) / n};
}

namespace {

GEstimate summarize_terms(const std::vector<GTerms>& terms, std::uint64_t seed, const std::string& prefix) {
  std::vector<double> v, t1, t2;
  for (const auto& t : terms) {
    v.push_back(t.value());
    t1.push_back(t.term1);
    t2.push_back(t.term2);
  }
  return {summarize(v, seed, prefix), summarize(t1, seed, prefix + "_term1"), summarize(t2, seed, prefix + "_term2")};
}

}  // namespace

GEstimate estimate_G(const RostSpec& rost, const MixtureSpec& spec, int n, const OverlapConstraint& c, int n_rep,
                     std::uint64_t seed) {
  if (n_rep < 2) throw PreconditionError("estimate_G needs n_rep >= 2");
  if (c.n() != n) throw PreconditionError("estimate_G: constraint N differs from N");
  const RostFieldSampler sampler(rost, spec);
  const std::vector<GTerms> terms = map_replicas<GTerms>(n_rep, [&](int r) {
    const std::uint64_t rs = derive_seed(seed, static_cast<std::uint64_t>(r));
    Engine weights_engine(derive_seed(rs, 1));
    const std::vector<double> log_w = draw_log_weights(rost.weights(), rost.size(), weights_engine);
    const CavityFieldSample fields = sampler.sample(n, derive_seed(rs, 2));
    return g_functional(log_w, fields, spec.field(1), spec.field(2), c);
  });
  return summarize_terms(terms, seed, "G");
}

double ExplicitRost::q_at(int l, int lp, int alpha, int beta) const {
  const auto& x = alphas.at(static_cast<std::size_t>(alpha));
  const auto& y = alphas.at(static_cast<std::size_t>(beta));
  const Mask a = l == 1 ? x.first : x.second;
  const Mask b = lp == 1 ? y.first : y.second;
  return static_cast<double>(magnetization(a ^ b, m)) / m;
}

RostSpec ExplicitRost::rost_spec(int max_size) const {
  const int size = static_cast<int>(alphas.size());
  if (size > max_size) {
    throw ResourceError("explicit structure has " + std::to_string(size) + " elements; q-matrices capped at " +
                        std::to_string(max_size));
  }
  Eigen::MatrixXd q11(size, size), q12(size, size), q22(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      q11(i, j) = q_at(1, 1, i, j);
      q12(i, j) = q_at(1, 2, i, j);
      q22(i, j) = q_at(2, 2, i, j);
    }
  }
  WeightSampler w;
  w.kind = WeightKind::explicit_system;
  return RostSpec(std::move(q11), std::move(q12), std::move(q22), std::move(w), delta(), u);
}

ExplicitRost build_explicit_rost(const MixtureSpec& spec, int m, int n, const OverlapConstraint& c_m, double u) {
  (void)spec;
  if (c_m.n() != m) throw PreconditionError("build_explicit_rost: constraint size differs from M");
  if (m < 1 || n < 1 || m + n > kExplicitMaxSpins) {
    throw DomainError("build_explicit_rost: need M, N >= 1 and M + N <= " + std::to_string(kExplicitMaxSpins));
  }
  ExplicitRost out;
  out.m = m;
  out.n = n;
  out.constraint_m = c_m.with_eps(0.0);
  out.u = u;
  const Mask size = Mask{1} << m;
  const int d = c_m.disagreements();
  std::vector<Mask> flips;
  for (Mask f = 0; f < size; ++f) {
    if (popcount(f) == d) flips.push_back(f);
  }
  out.alphas.reserve(static_cast<std::size_t>(size) * flips.size());
  for (Mask rho = 0; rho < size; ++rho) {
    for (Mask f : flips) out.alphas.emplace_back(rho, rho ^ f);
  }
  return out;
}

ExplicitRostDraw draw_explicit_rost(const ExplicitRost& rost, const MixtureSpec& spec, std::uint64_t seed) {
  ExplicitRostDraw draw;
  draw.tables = ExplicitCavity(spec, rost.m, rost.n, seed).tabulate();
  const auto& t = draw.tables;
  std::vector<double> log_w(rost.alphas.size());
  for (std::size_t k = 0; k < rost.alphas.size(); ++k) {
    const auto [r1, r2] = rost.alphas[k];
    log_w[k] = t.prefix[0][r1] + spec.field(1) * magnetization(r1, rost.m) + t.prefix[1][r2] +
               spec.field(2) * magnetization(r2, rost.m);
  }
  draw.log_weight_norm = log_sum_exp(log_w);
  for (double& v : log_w) v -= draw.log_weight_norm;
  draw.log_weights = std::move(log_w);
  return draw;
}

CavityFieldSample ExplicitRostDraw::fields(const ExplicitRost& rost, CavityVariant variant) const {
  const int size = static_cast<int>(rost.alphas.size());
  const std::size_t rho_count = std::size_t{1} << rost.m;
  CavityFieldSample out;
  out.n_sites = rost.n;
  out.size = size;
  out.variant = variant;
  const auto& z = variant == CavityVariant::limit ? tables.z_limit : tables.z_finite;
  const auto& y = variant == CavityVariant::limit ? tables.y_limit : tables.y_finite;
  for (int l = 0; l < 2; ++l) {
    out.z[l].resize(static_cast<std::size_t>(rost.n) * size);
    out.y[l].resize(static_cast<std::size_t>(size));
  }
  for (int alpha = 0; alpha < size; ++alpha) {
    const Mask rho[2] = {rost.alphas[alpha].first, rost.alphas[alpha].second};
    for (int l = 0; l < 2; ++l) {
      out.y[l][alpha] = y[l][rho[l]];
      for (int i = 0; i < rost.n; ++i) {
        out.z[l][static_cast<std::size_t>(i) * size + alpha] = z[l][i * rho_count + rho[l]];
      }
    }
  }
  return out;
}

namespace {

/// Both G terms straight from the per-rho tables, without materializing
/// alpha-indexed fields. Returns the unnormalized log of the first sum as well.
GTerms explicit_terms(const ExplicitRost& rost, const ExplicitRostDraw& draw, const MixtureSpec& spec,
                      const OverlapConstraint& c_n, CavityVariant variant, double* log_first_unnormalized) {
  const int n = rost.n;
  const std::size_t rho_count = std::size_t{1} << rost.m;
  const auto& z = variant == CavityVariant::limit ? draw.tables.z_limit : draw.tables.z_finite;
  const auto& y = variant == CavityVariant::limit ? draw.tables.y_limit : draw.tables.y_finite;
  const std::size_t size = rost.alphas.size();
  std::vector<double> first(size), second(size);
  std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  const double root_n = std::sqrt(static_cast<double>(n));
  const auto d = static_cast<std::size_t>(c_n.disagreements());
  for (std::size_t k = 0; k < size; ++k) {
    const auto [r1, r2] = rost.alphas[k];
    for (int i = 0; i < n; ++i) {
      a[i] = z[0][i * rho_count + r1] + spec.field(1);
      b[i] = z[1][i * rho_count + r2] + spec.field(2);
    }
    first[k] = draw.log_weights[k] + inner_cavity_profile(a, b)[d];
    second[k] = draw.log_weights[k] + root_n * (y[0][r1] + y[1][r2]);
  }
  const double lf = log_sum_exp(first);
  if (log_first_unnormalized) *log_first_unnormalized = lf + draw.log_weight_norm;
  return {lf / n, log_sum_exp(second) / n};
}

}  // namespace

GMNReplica explicit_g_replica(const ExplicitRost& rost, const MixtureSpec& spec, const OverlapConstraint& c_n,
                              std::uint64_t seed, bool with_holder) {
  if (c_n.n() != rost.n) throw PreconditionError("explicit_g_replica: constraint size differs from N");
  const ExplicitRostDraw draw = draw_explicit_rost(rost, spec, seed);
  GMNReplica out;
  double log_truncated = 0.0;
  out.limit = explicit_terms(rost, draw, spec, c_n, CavityVariant::limit, nullptr);
  out.finite = explicit_terms(rost, draw, spec, c_n, CavityVariant::finite, &log_truncated);
  if (with_holder) {
    const int total = rost.m + rost.n;
    const auto energy = ExplicitCavity(spec, rost.m, rost.n, seed).full_energy();
    const auto e1 = field_energies(energy[0], spec.field(1), total);
    const auto e2 = field_energies(energy[1], spec.field(2), total);
    const SplitOverlapPartition part = split_overlap_partition(e1, e2, rost.m, rost.n);
    const double log_full = part.log_at(rost.constraint_m.disagreements(), c_n.disagreements());
    out.holder_gap = (log_full - log_truncated) / rost.n;
  }
  return out;
}

GMNEstimate estimate_G_MN(const MixtureSpec& spec, int m, int n, const OverlapConstraint& c_m,
                          const OverlapConstraint& c_n, int n_rep, std::uint64_t seed, bool with_holder) {
  if (n_rep < 2) throw PreconditionError("estimate_G_MN needs n_rep >= 2");
  const ExplicitRost rost = build_explicit_rost(spec, m, n, c_m, c_m.u());
  const std::vector<GMNReplica> reps = map_replicas<GMNReplica>(n_rep, [&](int r) {
    return explicit_g_replica(rost, spec, c_n, derive_seed(seed, static_cast<std::uint64_t>(r)), with_holder);
  });
  std::vector<GTerms> lim, fin;
  std::vector<double> gap;
  for (const auto& r : reps) {
    lim.push_back(r.limit);
    fin.push_back(r.finite);
    gap.push_back(r.holder_gap);
  }
  GMNEstimate out{summarize_terms(lim, seed, "G_limit"), summarize_terms(fin, seed, "G_finite"), std::nullopt};
  if (with_holder) out.holder_gap = summarize(gap, seed, "holder_gap");
  return out;
}

}  // namespace sklab
