#include "sklab/disorder.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sklab/error.hpp"
#include "sklab/kernels.hpp"
#include "sklab/rng.hpp"
#include "sklab/stats.hpp"

namespace sklab {
namespace {

void check_n(int n, int cap, const char* who) {
  if (n < 1 || n > cap) {
    std::ostringstream os;
    os << who << " supports 1 <= N <= " << cap << ", got N = " << n;
    throw ResourceError(os.str());
  }
}

bool order_active(const MixtureSpec& spec, int p) {
  return spec.coeff(1, p) != 0.0 || spec.coeff(2, p) != 0.0;
}

Eigen::MatrixXd process_covariance(const MixtureSpec& spec, int n) {
  const Eigen::Index size = Eigen::Index{1} << n;
  Eigen::MatrixXd cov(2 * size, 2 * size);
  for (int l = 1; l <= 2; ++l) {
    for (int lp = 1; lp <= 2; ++lp) {
      for (Eigen::Index s = 0; s < size; ++s) {
        for (Eigen::Index t = 0; t < size; ++t) {
          const int k = n - 2 * std::popcount(static_cast<Mask>(s ^ t));
          cov((l - 1) * size + s, (lp - 1) * size + t) =
              n * spec.xi(l, lp, static_cast<double>(k) / n);
        }
      }
    }
  }
  return cov;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw InputError("truncated table dump");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

HamiltonianTable sample_tensor(const MixtureSpec& spec, int n, std::uint64_t seed) {
  check_n(n, kMaxSpins, "tensor sampler");
  GaussianStream gauss(seed);
  const CouplingTensors g = CouplingTensors::draw(n, spec.p_max(), gauss);
  const std::size_t size = std::size_t{1} << n;
  std::array<std::vector<double>, 2> coeffs{std::vector<double>(size, 0.0),
                                            std::vector<double>(size, 0.0)};
  for (int p = 1; p <= spec.p_max(); ++p) {
    if (!order_active(spec, p)) continue;
    const std::vector<double> poly = prefix_polynomial(g, p, n);
    const double scale = std::pow(static_cast<double>(n), 0.5 * (1 - p));
    for (int l = 1; l <= 2; ++l) {
      const double c = spec.coeff(l, p) * scale;
      if (c == 0.0) continue;
      auto& dst = coeffs[static_cast<std::size_t>(l - 1)];
      for (std::size_t s = 0; s < size; ++s) dst[s] += c * poly[s];
    }
  }
  HamiltonianTable table;
  table.n = n;
  table.p_max = spec.p_max();
  table.seed = seed;
  table.provenance = Provenance::tensor;
  for (int l = 0; l < 2; ++l) table.energy[l] = kernels::multilinear_eval(coeffs[l]);
  return table;
}

HamiltonianTable sample_process(const MixtureSpec& spec, int n, std::uint64_t seed) {
  return TableSampler(spec, n, SamplerKind::process).sample(seed);
}

std::string to_string(SamplerKind kind) { return kind == SamplerKind::tensor ? "tensor" : "process"; }

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "tensor") return SamplerKind::tensor;
  if (name == "process") return SamplerKind::process;
  throw InputError("unknown sampler '" + name + "' (expected tensor or process)");
}

TableSampler::TableSampler(MixtureSpec spec, int n, SamplerKind kind)
    : spec_(std::move(spec)), n_(n), kind_(kind) {
  if (kind_ == SamplerKind::tensor) {
    check_n(n, kMaxSpins, "tensor sampler");
    if (tensor_bytes(n, spec_.p_max()) > kTensorBudgetBytes) {
      throw ResourceError("coupling tensors for N = " + std::to_string(n) + ", p_max = " +
                          std::to_string(spec_.p_max()) +
                          " exceed the memory budget; use the process sampler");
    }
    return;
  }
  check_n(n, kProcessMaxSpins, "process sampler");
  factor_ = std::make_shared<const Eigen::MatrixXd>(
      gaussian_factor(process_covariance(spec_, n), "Hamiltonian covariance N xi(R)"));
}

HamiltonianTable TableSampler::sample(std::uint64_t seed) const {
  if (kind_ == SamplerKind::tensor) return sample_tensor(spec_, n_, seed);
  GaussianStream gauss(seed);
  Eigen::VectorXd white(factor_->rows());
  for (Eigen::Index i = 0; i < white.size(); ++i) white[i] = gauss.next();
  const Eigen::VectorXd values = factor_->triangularView<Eigen::Lower>() * white;
  const std::size_t size = std::size_t{1} << n_;
  HamiltonianTable table;
  table.n = n_;
  table.p_max = spec_.p_max();
  table.seed = seed;
  table.provenance = Provenance::process;
  for (std::size_t l = 0; l < 2; ++l) {
    table.energy[l].assign(values.data() + l * size, values.data() + (l + 1) * size);
  }
  return table;
}

Eigen::MatrixXd gaussian_factor(const Eigen::MatrixXd& cov, const std::string& what) {
  const Eigen::Index dim = cov.rows();
  if (dim == 0) return cov;
  const double scale = cov.trace() / static_cast<double>(dim);
  if (scale == 0.0 && cov.isZero(0.0)) return Eigen::MatrixXd::Zero(dim, dim);
  if (!(scale > 0.0)) {
    throw FactorizationError(what + ": covariance has non-positive trace");
  }
  std::vector<double> jitters{0.0};
  for (double j = 1e-16; j <= kJitterBudget * 1.0000001; j *= 10.0) jitters.push_back(j);
  for (double j : jitters) {
    Eigen::MatrixXd shifted = cov;
    shifted.diagonal().array() += j * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd lower = llt.matrixL();
    if (!lower.allFinite()) continue;
    return lower;
  }
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  std::ostringstream os;
  os << what << " is not positive semidefinite: smallest eigenvalue " << min_eig
     << " (trace/dim " << scale << ")";
  throw FactorizationError(os.str());
}

void write_table(std::ostream& out, const HamiltonianTable& table) {
  put_u32(out, static_cast<std::uint32_t>(table.n));
  put_u32(out, static_cast<std::uint32_t>(table.p_max));
  put_u64(out, table.seed);
  put_u32(out, static_cast<std::uint32_t>(table.provenance));
  for (const auto& block : table.energy) {
    for (double v : block) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
}

HamiltonianTable read_table(std::istream& in) {
  HamiltonianTable table;
  table.n = static_cast<int>(get_le(in, 4));
  table.p_max = static_cast<int>(get_le(in, 4));
  table.seed = get_le(in, 8);
  const auto prov = get_le(in, 4);
  if (prov > 1) throw InputError("unknown table provenance tag");
  table.provenance = static_cast<Provenance>(prov);
  check_n(table.n, kMaxSpins, "table dump");
  const std::size_t size = std::size_t{1} << table.n;
  for (auto& block : table.energy) {
    block.resize(size);
    for (double& v : block) v = std::bit_cast<double>(get_le(in, 8));
  }
  return table;
}

ExplicitCavity::ExplicitCavity(MixtureSpec spec, int m, int n, std::uint64_t seed)
    : spec_(std::move(spec)), m_(m), n_(n) {
  if (m < 1 || n < 1) throw DomainError("explicit cavity needs M, N >= 1");
  check_n(m + n, kMaxSpins, "explicit cavity (M+N)");
  GaussianStream gauss(seed);
  couplings_ = CouplingTensors::draw(m + n, spec_.p_max(), gauss);
  overlap_couplings_ = CouplingTensors::draw(m, spec_.p_max(), gauss);
}

double ExplicitCavity::z_scale(int p, CavityVariant variant) const {
  const double base = variant == CavityVariant::limit ? m_ : m_ + n_;
  return std::pow(base, 0.5 * (1 - p));
}

double ExplicitCavity::y_scale(int p, CavityVariant variant) const {
  if (variant == CavityVariant::limit) return std::sqrt(static_cast<double>(p - 1)) * std::pow(m_, -0.5 * p);
  const double gap = std::pow(m_, 1 - p) - std::pow(m_ + n_, 1 - p);
  return std::sqrt(std::max(gap, 0.0) / n_);
}

double ExplicitCavity::prefix_energy(int l, Mask rho) const {
  double acc = 0.0;
  for (int p = 1; p <= spec_.p_max(); ++p) {
    const double a = spec_.coeff(l, p);
    if (a == 0.0) continue;
    acc += a * std::pow(m_ + n_, 0.5 * (1 - p)) * prefix_value(couplings_, p, m_, rho);
  }
  return acc;
}

double ExplicitCavity::cavity_field(int l, int site, Mask rho, CavityVariant variant) const {
  if (site < 0 || site >= n_) throw DomainError("cavity site out of range");
  double acc = 0.0;
  for (int p = 1; p <= spec_.p_max(); ++p) {
    const double a = spec_.coeff(l, p);
    if (a == 0.0) continue;
    acc += a * z_scale(p, variant) * cavity_value(couplings_, p, m_, m_ + site, rho);
  }
  return acc;
}

double ExplicitCavity::overlap_field(int l, Mask rho, CavityVariant variant) const {
  double acc = 0.0;
  for (int p = 2; p <= spec_.p_max(); ++p) {
    const double a = spec_.coeff(l, p);
    if (a == 0.0) continue;
    acc += a * y_scale(p, variant) * prefix_value(overlap_couplings_, p, m_, rho);
  }
  return acc;
}

ExplicitCavity::Tables ExplicitCavity::tabulate() const {
  const std::size_t size = std::size_t{1} << m_;
  const std::size_t sites = static_cast<std::size_t>(n_);
  Tables t;
  for (int l = 0; l < 2; ++l) {
    t.prefix[l].assign(size, 0.0);
    t.z_limit[l].assign(size * sites, 0.0);
    t.z_finite[l].assign(size * sites, 0.0);
    t.y_limit[l].assign(size, 0.0);
    t.y_finite[l].assign(size, 0.0);
  }
  auto accumulate = [&](std::vector<double>& dst, std::size_t offset, const std::vector<double>& poly,
                        double c) {
    if (c == 0.0) return;
    for (std::size_t s = 0; s < size; ++s) dst[offset + s] += c * poly[s];
  };
  for (int p = 1; p <= spec_.p_max(); ++p) {
    if (!order_active(spec_, p)) continue;
    const std::vector<double> prefix = prefix_polynomial(couplings_, p, m_);
    const std::vector<double> overlap_poly = prefix_polynomial(overlap_couplings_, p, m_);
    for (int l = 1; l <= 2; ++l) {
      const double a = spec_.coeff(l, p);
      accumulate(t.prefix[l - 1], 0, prefix, a * std::pow(m_ + n_, 0.5 * (1 - p)));
      if (p >= 2) {
        accumulate(t.y_limit[l - 1], 0, overlap_poly, a * y_scale(p, CavityVariant::limit));
        accumulate(t.y_finite[l - 1], 0, overlap_poly, a * y_scale(p, CavityVariant::finite));
      }
    }
    for (int i = 0; i < n_; ++i) {
      const std::vector<double> cavity = cavity_polynomial(couplings_, p, m_, m_ + i);
      for (int l = 1; l <= 2; ++l) {
        const double a = spec_.coeff(l, p);
        const std::size_t off = static_cast<std::size_t>(i) * size;
        accumulate(t.z_limit[l - 1], off, cavity, a * z_scale(p, CavityVariant::limit));
        accumulate(t.z_finite[l - 1], off, cavity, a * z_scale(p, CavityVariant::finite));
      }
    }
  }
  auto eval_blocks = [&](std::vector<double>& v) {
    for (std::size_t off = 0; off < v.size(); off += size) {
      kernels::walsh_hadamard(std::span<double>(v.data() + off, size));
    }
  };
  for (int l = 0; l < 2; ++l) {
    eval_blocks(t.prefix[l]);
    eval_blocks(t.z_limit[l]);
    eval_blocks(t.z_finite[l]);
    eval_blocks(t.y_limit[l]);
    eval_blocks(t.y_finite[l]);
  }
  return t;
}

std::array<std::vector<double>, 2> ExplicitCavity::full_energy() const {
  const int k = m_ + n_;
  const std::size_t size = std::size_t{1} << k;
  std::array<std::vector<double>, 2> coeffs{std::vector<double>(size, 0.0),
                                            std::vector<double>(size, 0.0)};
  for (int p = 1; p <= spec_.p_max(); ++p) {
    if (!order_active(spec_, p)) continue;
    const std::vector<double> poly = prefix_polynomial(couplings_, p, k);
    for (int l = 1; l <= 2; ++l) {
      const double c = spec_.coeff(l, p) * std::pow(k, 0.5 * (1 - p));
      if (c == 0.0) continue;
      for (std::size_t s = 0; s < size; ++s) coeffs[l - 1][s] += c * poly[s];
    }
  }
  for (auto& c : coeffs) kernels::walsh_hadamard(c);
  return coeffs;
}

ExplicitCavity sample_explicit_cavity(const MixtureSpec& spec, int m, int n, std::uint64_t seed) {
  return ExplicitCavity(spec, m, n, seed);
}

CovarianceReport empirical_covariance(const TableSampler& sampler, int n_rep, std::uint64_t seed,
                                      std::span<const CovarianceProbe> probes) {
  if (n_rep < 2) throw PreconditionError("empirical_covariance needs at least 2 replicas");
  const std::size_t n_probe = probes.size();
  for (const auto& pr : probes) {
    if (pr.sigma.n != sampler.n() || pr.sigma_prime.n != sampler.n()) {
      throw PreconditionError("probe length differs from sampler N");
    }
  }
  std::vector<double> products(static_cast<std::size_t>(n_rep) * n_probe);
  const double n = sampler.n();
#pragma omp parallel for schedule(dynamic, 16)
  for (int r = 0; r < n_rep; ++r) {
    const HamiltonianTable table = sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t j = 0; j < n_probe; ++j) {
      const auto& pr = probes[j];
      products[static_cast<std::size_t>(r) * n_probe + j] =
          table.values(pr.l)[pr.sigma.bits] * table.values(pr.lp)[pr.sigma_prime.bits] / n;
    }
  }
  CovarianceReport report;
  std::vector<double> column(static_cast<std::size_t>(n_rep));
  for (std::size_t j = 0; j < n_probe; ++j) {
    for (int r = 0; r < n_rep; ++r) column[r] = products[static_cast<std::size_t>(r) * n_probe + j];
    const Estimate e = summarize(column, seed, "covariance");
    CovarianceProbeResult res;
    res.probe = probes[j];
    res.target = sampler.spec().xi(probes[j].l, probes[j].lp, overlap(probes[j].sigma, probes[j].sigma_prime).value());
    res.mean = e.mean;
    res.std_error = e.std_error;
    const double gap = e.mean - res.target;
    res.z_score = e.std_error > 0.0 ? gap / e.std_error
                                    : (std::abs(gap) < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity());
    report.max_abs_z = std::max(report.max_abs_z, std::abs(res.z_score));
    report.probes.push_back(res);
  }
  return report;
}

}  // namespace sklab
