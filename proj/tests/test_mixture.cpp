#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sklab/error.hpp"
#include "sklab/mixture.hpp"

using sklab::MixtureSpec;

TEST_CASE("xi evaluates the power series") {
  const auto pure2 = MixtureSpec::pure(2);
  CHECK(pure2.xi(1, 1, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(pure2.xi(1, 2, 0.0) == 0.0);

  const MixtureSpec mixed({0.0, 1.0, 0.5}, {0.0, 1.0, 0.0});
  CHECK(mixed.xi(1, 1, 1.0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(mixed.xi(1, 2, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mixed.xi(2, 2, -0.5) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("theta matches x xi' - xi") {
  CHECK(MixtureSpec::pure(2).theta(1, 1, 0.5) == doctest::Approx(0.25));
  CHECK(MixtureSpec::pure(4).theta(1, 1, 1.0) == doctest::Approx(3.0));
  CHECK(MixtureSpec::pure(3).theta(1, 2, 0.0) == 0.0);

  const MixtureSpec spec({0.3, 1.0, 0.2, 0.7}, {0.1, 0.8, 0.0, 0.4});
  for (int i = -100; i <= 100; ++i) {
    const double x = i / 100.0;
    for (auto [l, lp] : sklab::kCopyPairs) {
      const double direct = x * spec.xi_prime(l, lp, x) - spec.xi(l, lp, x);
      const double theta = spec.theta(l, lp, x);
      CHECK(std::abs(theta - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("derivatives agree with central differences") {
  const MixtureSpec spec({0.2, 0.9, 0.4}, {0.5, 0.3, 0.6});
  const double h = 1e-5;
  for (double x : {-0.7, -0.1, 0.3, 0.8}) {
    const double fd1 = (spec.xi(1, 2, x + h) - spec.xi(1, 2, x - h)) / (2 * h);
    const double fd2 = (spec.xi_prime(1, 2, x + h) - spec.xi_prime(1, 2, x - h)) / (2 * h);
    CHECK(spec.xi_prime(1, 2, x) == doctest::Approx(fd1).epsilon(1e-8));
    CHECK(spec.xi_second(1, 2, x) == doctest::Approx(fd2).epsilon(1e-8));
  }
}

TEST_CASE("arguments outside [-1, 1] are rejected") {
  const auto spec = MixtureSpec::pure(2);
  CHECK_THROWS_AS(spec.xi(1, 1, 1.5), sklab::DomainError);
  CHECK_THROWS_AS(spec.theta(1, 1, -1.01), sklab::DomainError);
  CHECK_NOTHROW(spec.xi(1, 1, 1.0 + 1e-14));
}

TEST_CASE("sequences of different length are padded") {
  const MixtureSpec spec({1.0}, {0.0, 0.0, 2.0});
  CHECK(spec.p_max() == 3);
  CHECK(spec.coeff(1, 3) == 0.0);
  CHECK(spec.coeff(2, 3) == 2.0);
  CHECK(spec.xi(1, 2, 0.5) == 0.0);
}

TEST_CASE("convexity report") {
  const auto pure2 = sklab::check_convexity(MixtureSpec::pure(2));
  CHECK(pure2.convex);
  CHECK(pure2.structural);

  CHECK(sklab::check_convexity(MixtureSpec::pure(1)).convex);

  const auto cubic = MixtureSpec::symmetric({1.0, 0.0, -1.0});
  const auto report = sklab::check_convexity(cubic);
  CHECK_FALSE(report.convex);
  CHECK(report.worst_second_difference < 0.0);
  CHECK_THROWS_AS(sklab::require_convex(cubic, "test"), sklab::StructuralError);
  CHECK_THROWS_AS(sklab::check_positivity(cubic, 11), sklab::StructuralError);
}

TEST_CASE("positivity of xi(x) - x xi'(y) + theta(y)") {
  const auto pure2 = MixtureSpec::pure(2);
  CHECK(pure2.xi(1, 1, 0.0) - 0.0 * pure2.xi_prime(1, 1, 1.0) + pure2.theta(1, 1, 1.0) == doctest::Approx(1.0));
  for (int i = -10; i <= 10; ++i) {
    const double x = i / 10.0;
    const double v = pure2.xi(1, 2, x) - x * pure2.xi_prime(1, 2, x) + pure2.theta(1, 2, x);
    CHECK(std::abs(v) < 1e-15);
  }
  const auto even = MixtureSpec::symmetric({0.0, 1.0, 0.0, 0.3});
  CHECK(sklab::check_positivity(even, 101).overall_minimum() >= -1e-12);
}

TEST_CASE("binary entropy") {
  CHECK(sklab::binary_entropy(0.0) == 0.0);
  CHECK(sklab::binary_entropy(1.0) == doctest::Approx(std::log(2.0)));
  CHECK(sklab::binary_entropy(0.5) == doctest::Approx(0.130812).epsilon(1e-6));
  CHECK_THROWS_AS(sklab::binary_entropy(1.5), sklab::DomainError);
  CHECK_THROWS_AS(sklab::binary_entropy(-0.1), sklab::DomainError);
}

TEST_CASE("json round trip") {
  const MixtureSpec spec({0.1, 0.7}, {0.2, 0.5}, 0.3, -0.4);
  const auto back = MixtureSpec::from_json(spec.to_json());
  CHECK(back.coeffs(1) == spec.coeffs(1));
  CHECK(back.coeffs(2) == spec.coeffs(2));
  CHECK(back.field(1) == 0.3);
  CHECK(back.field(2) == -0.4);
}
