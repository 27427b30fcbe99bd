#include <doctest.h>

#include <cmath>
#include <vector>

#include "sklab/error.hpp"
#include "sklab/rng.hpp"
#include "sklab/rost.hpp"
#include "sklab/stats.hpp"

using sklab::MixtureSpec;
using sklab::RostSpec;
using sklab::WeightKind;
using sklab::WeightSampler;

namespace {

RostSpec single(double u, double delta = 0.0) {
  Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd q12 = Eigen::MatrixXd::Constant(1, 1, u);
  return RostSpec(one, q12, one, WeightSampler{WeightKind::fixed, {1.0}, 1.0}, delta, u);
}

}  // namespace

TEST_CASE("structure validation") {
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd q12 = Eigen::MatrixXd::Constant(2, 2, 0.1);
  const WeightSampler w{WeightKind::fixed, {1.0, 1.0}, 1.0};
  CHECK_NOTHROW(RostSpec(q, q12, q, w, 0.1, 0.0));
  CHECK_THROWS_AS(RostSpec(q, q12, q, w, 0.05, 0.0), sklab::RostInvalidError);
  Eigen::MatrixXd bad_diag = q;
  bad_diag(1, 1) = 0.9;
  CHECK_THROWS_AS(RostSpec(bad_diag, q12, q, w, 0.1, 0.0), sklab::RostInvalidError);
  Eigen::MatrixXd too_big = q;
  too_big(0, 1) = too_big(1, 0) = 1.2;
  CHECK_THROWS_AS(RostSpec(too_big, q12, q, w, 0.1, 0.0), sklab::RostInvalidError);
  CHECK_THROWS_AS(RostSpec(q, q12, q, WeightSampler{WeightKind::fixed, {1.0}, 1.0}, 0.1, 0.0),
                  sklab::RostInvalidError);
}

TEST_CASE("non-PSD field covariance is rejected") {
  Eigen::MatrixXd q(2, 2);
  q << 1.0, -1.0, -1.0, 1.0;
  Eigen::MatrixXd q12(2, 2);
  q12 << 0.0, 1.0, 1.0, 0.0;
  const RostSpec rost(q, q12, q, WeightSampler{WeightKind::fixed, {1.0, 1.0}, 1.0}, 0.0, 0.0);
  CHECK_THROWS_AS(sklab::RostFieldSampler(rost, MixtureSpec::pure(2)), sklab::RostInvalidError);
}

TEST_CASE("weights are normalized") {
  sklab::Engine engine(1);
  const WeightSampler fixed{WeightKind::fixed, {1.0, 3.0}, 1.0};
  const auto lw = sklab::draw_log_weights(fixed, 2, engine);
  CHECK(std::exp(lw[0]) == doctest::Approx(0.25));
  CHECK(std::exp(lw[1]) == doctest::Approx(0.75));

  const WeightSampler scaled{WeightKind::fixed, {10.0, 30.0}, 1.0};
  const auto scaled_lw = sklab::draw_log_weights(scaled, 2, engine);
  CHECK(scaled_lw[0] == doctest::Approx(lw[0]).epsilon(1e-14));
  CHECK(scaled_lw[1] == doctest::Approx(lw[1]).epsilon(1e-14));

  const WeightSampler dir{WeightKind::dirichlet, {}, 0.5};
  for (int r = 0; r < 20; ++r) {
    const auto d = sklab::draw_log_weights(dir, 5, engine);
    double total = 0.0;
    for (double v : d) total += std::exp(v);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS(sklab::draw_log_weights(WeightSampler{WeightKind::explicit_system, {}, 1.0}, 3, engine));
}

TEST_CASE("single-element structure: z covariance is xi'(1), xi'(u)") {
  const double u = 0.4;
  const MixtureSpec spec({0.2, 1.0, 0.5}, {0.3, 0.8, 0.4});
  const auto rost = single(u);
  const sklab::RostFieldSampler sampler(rost, spec);
  const int reps = 10000;
  std::vector<double> z11(reps), z12(reps), z22(reps), y12(reps);
  for (int r = 0; r < reps; ++r) {
    const auto f = sampler.sample(1, sklab::derive_seed(3, r));
    z11[r] = f.z_at(1, 0, 0) * f.z_at(1, 0, 0);
    z12[r] = f.z_at(1, 0, 0) * f.z_at(2, 0, 0);
    z22[r] = f.z_at(2, 0, 0) * f.z_at(2, 0, 0);
    y12[r] = f.y_at(1, 0) * f.y_at(2, 0);
  }
  auto within = [](const std::vector<double>& v, double target) {
    const auto e = sklab::summarize(v, 0, "");
    return std::abs(e.mean - target) <= 3 * e.std_error;
  };
  CHECK(within(z11, spec.xi_prime(1, 1, 1.0)));
  CHECK(within(z12, spec.xi_prime(1, 2, u)));
  CHECK(within(z22, spec.xi_prime(2, 2, 1.0)));
  CHECK(within(y12, spec.theta(1, 2, u)));
}

TEST_CASE("linear mixture has vanishing y fields") {
  const auto f = sklab::sample_rost_fields(single(0.2), MixtureSpec::pure(1), 3, 4);
  for (int l = 0; l < 2; ++l) {
    for (double y : f.y[l]) CHECK(y == 0.0);
  }
}

TEST_CASE("random structure: y covariance matches theta(q)") {
  sklab::Engine engine(12);
  const auto rost = sklab::random_rost(3, 0.0, 0.05, WeightSampler{WeightKind::dirichlet, {}, 1.0}, engine);
  CHECK(rost.size() == 3);
  for (int a = 0; a < 3; ++a) {
    CHECK(rost.q_at(1, 1, a, a) == 1.0);
    CHECK(std::abs(rost.q_at(1, 2, a, a)) <= 0.05 + 1e-12);
  }
  const auto spec = MixtureSpec({0.0, 1.0, 0.6}, {0.0, 0.8, 0.9});
  const sklab::RostFieldSampler sampler(rost, spec);
  const int reps = 10000;
  std::vector<double> prod(reps);
  for (auto [l, lp, a, b] : {std::array{1, 2, 0, 1}, std::array{2, 2, 1, 2}, std::array{1, 1, 0, 2}}) {
    for (int r = 0; r < reps; ++r) {
      const auto f = sampler.sample(1, sklab::derive_seed(77, r));
      prod[r] = f.y_at(l, a) * f.y_at(lp, b);
    }
    const auto e = sklab::summarize(prod, 0, "");
    CHECK(std::abs(e.mean - spec.theta(l, lp, rost.q_at(l, lp, a, b))) <= 3 * e.std_error);
  }
}

TEST_CASE("q(2,1) is the transpose of q(1,2)") {
  sklab::Engine engine(2);
  const auto rost = sklab::random_rost(4, 0.3, 0.1, WeightSampler{}, engine);
  CHECK(rost.q(2, 1).isApprox(rost.q(1, 2).transpose()));
  CHECK(rost.q_at(2, 1, 0, 3) == rost.q_at(1, 2, 3, 0));
}

TEST_CASE("json round trip") {
  sklab::Engine engine(5);
  const auto rost = sklab::random_rost(3, -0.2, 0.1, WeightSampler{WeightKind::dirichlet, {}, 2.0}, engine);
  const auto back = RostSpec::from_json(rost.to_json());
  CHECK(back.q(1, 2).isApprox(rost.q(1, 2), 0.0));
  CHECK(back.weights().kind == WeightKind::dirichlet);
  CHECK(back.weights().gamma == 2.0);
  CHECK(back.delta() == rost.delta());
  CHECK_THROWS_AS(RostSpec::from_json(nlohmann::json{{"q11", 1}}), sklab::InputError);
}
