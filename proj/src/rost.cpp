#include "sklab/rost.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "sklab/error.hpp"

namespace sklab {
namespace {

constexpr double kQSlack = 1e-12;

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* name) {
  const auto rows = j.at(name).get<std::vector<std::vector<double>>>();
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    if (static_cast<Eigen::Index>(rows[a].size()) != m) {
      throw InputError(std::string(name) + " must be square");
    }
    for (Eigen::Index b = 0; b < m; ++b) out(a, b) = rows[a][b];
  }
  return out;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& q) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index a = 0; a < q.rows(); ++a) {
    std::vector<double> row(q.cols());
    for (Eigen::Index b = 0; b < q.cols(); ++b) row[b] = q(a, b);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<double> draw_log_weights(const WeightSampler& sampler, int size, Engine& engine) {
  std::vector<double> logw(static_cast<std::size_t>(size));
  switch (sampler.kind) {
    case WeightKind::fixed: {
      if (static_cast<int>(sampler.values.size()) != size) {
        throw InputError("fixed weight list length differs from the index set size");
      }
      for (int a = 0; a < size; ++a) {
        if (!(sampler.values[a] >= 0.0)) throw InputError("weights must be nonnegative");
        logw[a] = sampler.values[a] > 0.0 ? std::log(sampler.values[a]) : -INFINITY;
      }
      break;
    }
    case WeightKind::dirichlet: {
      if (!(sampler.gamma > 0.0)) throw InputError("Dirichlet concentration must be positive");
      std::gamma_distribution<double> gam(sampler.gamma, 1.0);
      for (int a = 0; a < size; ++a) {
        const double g = gam(engine);
        logw[a] = g > 0.0 ? std::log(g) : -INFINITY;
      }
      break;
    }
    case WeightKind::explicit_system:
      throw PreconditionError("explicit-system weights are produced by the explicit ROSt builder");
  }
  double mx = -INFINITY;
  for (double v : logw) mx = std::max(mx, v);
  if (!std::isfinite(mx)) throw InputError("weights sum to zero");
  double s = 0.0;
  for (double v : logw) s += std::exp(v - mx);
  const double log_norm = mx + std::log(s);
  for (double& v : logw) v -= log_norm;
  return logw;
}

RostSpec::RostSpec(Eigen::MatrixXd q11, Eigen::MatrixXd q12, Eigen::MatrixXd q22,
                   WeightSampler weights, double delta, double u)
    : q11_(std::move(q11)), q12_(std::move(q12)), q22_(std::move(q22)), weights_(std::move(weights)),
      delta_(delta), u_(u) {
  const Eigen::Index m = q11_.rows();
  if (m < 1) throw RostInvalidError("ROSt index set must be nonempty");
  for (const auto* q : {&q11_, &q12_, &q22_}) {
    if (q->rows() != m || q->cols() != m) throw RostInvalidError("q matrices must all be size x size");
    if (!(q->array().abs() <= 1.0 + kQSlack).all()) throw RostInvalidError("|q| must be <= 1");
  }
  if (!(delta_ >= 0.0)) throw RostInvalidError("delta must be nonnegative");
  for (Eigen::Index a = 0; a < m; ++a) {
    if (std::abs(q11_(a, a) - 1.0) > kQSlack || std::abs(q22_(a, a) - 1.0) > kQSlack) {
      throw RostInvalidError("self-overlaps q^{l,l}_{alpha,alpha} must equal 1");
    }
    if (std::abs(q12_(a, a) - u_) > delta_ + kQSlack) {
      std::ostringstream os;
      os << "|q^{1,2}_{" << a << "," << a << "} - u| = " << std::abs(q12_(a, a) - u_)
         << " exceeds delta = " << delta_;
      throw RostInvalidError(os.str());
    }
  }
  if (!q11_.isApprox(q11_.transpose(), 1e-12) || !q22_.isApprox(q22_.transpose(), 1e-12)) {
    throw RostInvalidError("q^{1,1} and q^{2,2} must be symmetric");
  }
  if (weights_.kind == WeightKind::fixed && static_cast<Eigen::Index>(weights_.values.size()) != m) {
    throw RostInvalidError("fixed weight list length differs from the index set size");
  }
}

Eigen::MatrixXd RostSpec::q(int l, int lp) const {
  if (l == 1 && lp == 1) return q11_;
  if (l == 2 && lp == 2) return q22_;
  if (l == 1 && lp == 2) return q12_;
  if (l == 2 && lp == 1) return q12_.transpose();
  throw DomainError("copy index must be 1 or 2");
}

double RostSpec::q_at(int l, int lp, int alpha, int beta) const {
  if (l == 1 && lp == 1) return q11_(alpha, beta);
  if (l == 2 && lp == 2) return q22_(alpha, beta);
  if (l == 1 && lp == 2) return q12_(alpha, beta);
  return q12_(beta, alpha);
}

Eigen::MatrixXd RostSpec::covariance(const MixtureSpec& spec, FieldKind kind) const {
  const Eigen::Index m = size();
  Eigen::MatrixXd cov(2 * m, 2 * m);
  for (int l = 1; l <= 2; ++l) {
    for (int lp = 1; lp <= 2; ++lp) {
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
          const double x = q_at(l, lp, static_cast<int>(a), static_cast<int>(b));
          cov((l - 1) * m + a, (lp - 1) * m + b) =
              kind == FieldKind::cavity ? spec.xi_prime(l, lp, x) : spec.theta(l, lp, x);
        }
      }
    }
  }
  return cov;
}

nlohmann::json RostSpec::to_json() const {
  nlohmann::json w;
  switch (weights_.kind) {
    case WeightKind::fixed: w = {{"kind", "fixed"}, {"values", weights_.values}}; break;
    case WeightKind::dirichlet: w = {{"kind", "dirichlet"}, {"gamma", weights_.gamma}}; break;
    case WeightKind::explicit_system: w = {{"kind", "explicit"}}; break;
  }
  return {{"q11", matrix_to_json(q11_)}, {"q12", matrix_to_json(q12_)}, {"q22", matrix_to_json(q22_)},
          {"weights", w}, {"delta", delta_}, {"u", u_}};
}

RostSpec RostSpec::from_json(const nlohmann::json& j) {
  try {
    WeightSampler w;
    const auto& wj = j.at("weights");
    const std::string kind = wj.at("kind").get<std::string>();
    if (kind == "fixed") {
      w.kind = WeightKind::fixed;
      w.values = wj.at("values").get<std::vector<double>>();
    } else if (kind == "dirichlet") {
      w.kind = WeightKind::dirichlet;
      w.gamma = wj.value("gamma", 1.0);
    } else {
      throw InputError("weights.kind must be \"fixed\" or \"dirichlet\", got \"" + kind + "\"");
    }
    return RostSpec(matrix_from_json(j, "q11"), matrix_from_json(j, "q12"), matrix_from_json(j, "q22"),
                    std::move(w), j.at("delta").get<double>(), j.at("u").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed ROSt file: ") + e.what());
  }
}

RostFieldSampler::RostFieldSampler(const RostSpec& rost, const MixtureSpec& spec) : size_(rost.size()) {
  try {
    z_factor_ = gaussian_factor(rost.covariance(spec, FieldKind::cavity), "cavity covariance xi'(q)");
    y_factor_ = gaussian_factor(rost.covariance(spec, FieldKind::overlap), "overlap covariance theta(q)");
  } catch (const FactorizationError& e) {
    throw RostInvalidError(std::string("invalid ROSt: ") + e.what());
  }
}

CavityFieldSample RostFieldSampler::sample(int n_sites, std::uint64_t seed) const {
  GaussianStream gauss(seed);
  CavityFieldSample out;
  out.n_sites = n_sites;
  out.size = size_;
  out.variant = CavityVariant::limit;
  const auto m = static_cast<std::size_t>(size_);
  for (auto& z : out.z) z.resize(m * static_cast<std::size_t>(n_sites));
  Eigen::VectorXd white(2 * size_);
  for (int i = 0; i < n_sites; ++i) {
    for (Eigen::Index k = 0; k < white.size(); ++k) white[k] = gauss.next();
    const Eigen::VectorXd v = z_factor_.triangularView<Eigen::Lower>() * white;
    for (std::size_t a = 0; a < m; ++a) {
      out.z[0][static_cast<std::size_t>(i) * m + a] = v[static_cast<Eigen::Index>(a)];
      out.z[1][static_cast<std::size_t>(i) * m + a] = v[static_cast<Eigen::Index>(m + a)];
    }
  }
  for (Eigen::Index k = 0; k < white.size(); ++k) white[k] = gauss.next();
  const Eigen::VectorXd v = y_factor_.triangularView<Eigen::Lower>() * white;
  out.y[0].assign(v.data(), v.data() + m);
  out.y[1].assign(v.data() + m, v.data() + 2 * m);
  return out;
}

CavityFieldSample sample_rost_fields(const RostSpec& rost, const MixtureSpec& spec, int n_sites,
                                     std::uint64_t seed) {
  return RostFieldSampler(rost, spec).sample(n_sites, seed);
}

RostSpec random_rost(int size, double u, double delta, WeightSampler weights, Engine& engine, int dim) {
  if (size < 1 || dim < 2) throw DomainError("random_rost needs size >= 1 and dim >= 2");
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto unit = [&]() {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v[k] = normal(engine);
    return Eigen::VectorXd(v.normalized());
  };
  std::vector<Eigen::VectorXd> first, second;
  for (int a = 0; a < size; ++a) {
    const Eigen::VectorXd v = unit();
    Eigen::VectorXd w = unit();
    w -= w.dot(v) * v;
    w.normalize();
    const double c = std::clamp(u + delta * unif(engine), -1.0, 1.0);
    first.push_back(v);
    second.push_back(c * v + std::sqrt(std::max(0.0, 1.0 - c * c)) * w);
  }
  Eigen::MatrixXd q11(size, size), q12(size, size), q22(size, size);
  for (int a = 0; a < size; ++a) {
    for (int b = 0; b < size; ++b) {
      q11(a, b) = std::clamp(first[a].dot(first[b]), -1.0, 1.0);
      q22(a, b) = std::clamp(second[a].dot(second[b]), -1.0, 1.0);
      q12(a, b) = std::clamp(first[a].dot(second[b]), -1.0, 1.0);
    }
    q11(a, a) = 1.0;
    q22(a, a) = 1.0;
  }
  if (weights.kind == WeightKind::fixed && weights.values.empty()) weights.values.assign(size, 1.0);
  return RostSpec(q11, q12, q22, std::move(weights), delta, u);
}

}  // namespace sklab
