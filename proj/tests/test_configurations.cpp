#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "sklab/configurations.hpp"
#include "sklab/error.hpp"
#include "sklab/mixture.hpp"

using sklab::Fraction;
using sklab::Mask;
using sklab::OverlapConstraint;
using sklab::SpinConfig;

TEST_CASE("overlap and hamming on small configurations") {
  const SpinConfig a = SpinConfig::parse("++++");
  CHECK(sklab::overlap(a, a) == Fraction{1, 1});
  CHECK(sklab::overlap(a, a.flipped()) == Fraction{-1, 1});
  CHECK(sklab::hamming(a, a).value() == 0.0);
  CHECK(sklab::hamming(a, a.flipped()).value() == 1.0);
  const SpinConfig b = SpinConfig::parse("+++-");
  CHECK(sklab::overlap(a, b).value() == 0.5);
  CHECK(sklab::hamming(a, b).value() == 0.25);
  CHECK_THROWS(sklab::overlap(a, SpinConfig::parse("+++")));
}

TEST_CASE("overlap = 1 - 2 hamming exhaustively up to N = 8") {
  for (int n = 1; n <= 8; ++n) {
    for (Mask s = 0; s < (Mask{1} << n); ++s) {
      for (Mask t = 0; t < (Mask{1} << n); ++t) {
        const SpinConfig x(n, s), y(n, t);
        const Fraction r = sklab::overlap(x, y);
        const Fraction d = sklab::hamming(x, y);
        REQUIRE(r.num * d.den == (d.den - 2 * d.num) * r.den);
        REQUIRE(r.num == n - 2 * oracle::hamming(s, t, n));
      }
    }
  }
}

TEST_CASE("spin strings round trip with the highest index on the left") {
  const SpinConfig s = SpinConfig::parse("+-++");
  CHECK(s.spin(0) == 1);
  CHECK(s.spin(2) == -1);
  CHECK(s.to_string() == "+-++");
  CHECK_THROWS(SpinConfig::parse("+x-"));
}

TEST_CASE("constraints enforce parity and range") {
  CHECK_NOTHROW(OverlapConstraint(4, 2));
  CHECK_THROWS_AS(OverlapConstraint(4, 1), sklab::StructuralError);
  CHECK_THROWS(OverlapConstraint(4, 6));
  CHECK_THROWS(OverlapConstraint(4, 0, -0.1));
  const OverlapConstraint c(6, 2, 1.0 / 3.0);
  CHECK(c.disagreements() == 2);
  CHECK(c.u() == doctest::Approx(1.0 / 3.0));
  const auto back = OverlapConstraint::from_json(c.to_json());
  CHECK(back.n() == 6);
  CHECK(back.k() == 2);
  CHECK(back.eps() == c.eps());
}

TEST_CASE("nearest admissible target") {
  CHECK(sklab::nearest_admissible(4, 0.0).k() == 0);
  CHECK(sklab::nearest_admissible(4, 0.0).disagreements() == 2);
  CHECK(sklab::nearest_admissible(3, 0.0).k() == 1);
  CHECK(sklab::nearest_admissible(6, 0.3).k() == 2);
  CHECK(sklab::nearest_admissible(5, 1.0).k() == 5);
  for (int n = 1; n <= 12; ++n) {
    for (int i = -20; i <= 20; ++i) {
      const double u = i / 20.0;
      const auto c = sklab::nearest_admissible(n, u);
      CHECK(std::abs(c.u() - u) <= 1.0 / n + 1e-12);
    }
  }
}

TEST_CASE("pair counts") {
  CHECK(sklab::pair_count(OverlapConstraint(4, 4)) == 16);
  CHECK(sklab::pair_count(OverlapConstraint(2, 0)) == 8);
  CHECK(sklab::pair_count(OverlapConstraint(4, 2)) == 64);
  for (int n = 1; n <= 8; ++n) {
    for (int k = -n; k <= n; k += 2) {
      const OverlapConstraint c(n, k);
      std::uint64_t brute = 0;
      for (Mask s = 0; s < (Mask{1} << n); ++s) {
        for (Mask t = 0; t < (Mask{1} << n); ++t) brute += oracle::hamming(s, t, n) == c.disagreements();
      }
      REQUIRE(sklab::pair_count(c) == brute);
    }
  }
  CHECK(sklab::window_pair_count(OverlapConstraint(4, 0, 2.0)) == 256);
}

TEST_CASE("projection example") {
  const SpinConfig s1 = SpinConfig::parse("++++");
  const SpinConfig s2 = SpinConfig::parse("+++-");
  const OverlapConstraint target(4, 0, 0.5);
  CHECK(sklab::project_pi(s1, s2, target).to_string() == "++--");
  CHECK(sklab::project_pi(s1, s2, OverlapConstraint(4, 2)) == s2);
  CHECK_THROWS_AS(sklab::project_pi(s1, s1.flipped(), target), sklab::PreconditionError);
}

TEST_CASE("projection lands on the slice, moves at most eps N / 2 and is idempotent") {
  const int n = 6;
  for (double eps : {1.0 / 3.0, 2.0 / 3.0}) {
    for (int k = -n; k <= n; k += 2) {
      const OverlapConstraint c(n, k, eps);
      for (Mask s = 0; s < (Mask{1} << n); ++s) {
        for (Mask t = 0; t < (Mask{1} << n); ++t) {
          const SpinConfig s1(n, s), s2(n, t);
          if (!c.window_contains(oracle::hamming(s, t, n))) continue;
          const SpinConfig p = sklab::project_pi(s1, s2, c);
          REQUIRE(oracle::hamming(s, p.bits, n) == c.disagreements());
          REQUIRE(oracle::hamming(t, p.bits, n) <= eps * n / 2 + 1e-9);
          REQUIRE(sklab::project_pi(s1, p, c) == p);
        }
      }
    }
  }
}

TEST_CASE("fiber counts") {
  const SpinConfig s1 = SpinConfig::parse("+-+-+-");
  const OverlapConstraint exact(6, 0);
  const SpinConfig target = SpinConfig::parse("++++--");
  const auto single = sklab::fiber_count(s1, target, exact);
  std::uint64_t brute = 0;
  for (Mask s2 = 0; s2 < (Mask{1} << 6); ++s2) {
    if (!exact.window_contains(oracle::hamming(s1.bits, s2, 6))) continue;
    brute += sklab::project_pi(s1, SpinConfig(6, s2), exact) == target;
  }
  CHECK(single.count == brute);
  CHECK(single.count == 1);

  for (int n = 2; n <= 8; n += 2) {
    for (double eps : {0.0, 2.0 / n, 4.0 / n}) {
      const OverlapConstraint c = sklab::nearest_admissible(n, 0.0, eps);
      const SpinConfig base(n, 0);
      std::uint64_t total = 0;
      for (Mask t = 0; t < (Mask{1} << n); ++t) {
        if (oracle::hamming(0, t, n) != c.disagreements()) continue;
        const auto report = sklab::fiber_count(base, SpinConfig(n, t), c);
        REQUIRE(report.within_bound);
        REQUIRE(static_cast<double>(report.count) <= report.bound * (1 + 1e-12));
        total += report.count;
      }
      std::uint64_t window = 0;
      for (Mask t = 0; t < (Mask{1} << n); ++t) window += c.window_contains(oracle::hamming(0, t, n));
      CHECK(total == window);
    }
  }
  const auto report = sklab::fiber_count(SpinConfig(6, 0), SpinConfig(6, 0b000111), OverlapConstraint(6, 0, 1.0 / 3.0));
  CHECK(report.bound == doctest::Approx(64.0 * std::exp(-6.0 * sklab::binary_entropy(2.0 / 3.0))));
}

TEST_CASE("admissible u' construction") {
  auto alternating = [](int m) { return m % 2 == 0 ? 0 : 1; };
  const auto r = sklab::construct_u_prime(2, 0.0, alternating, 40);
  CHECK(r.value.k() == 0);
  std::set<int> rec(r.recurrence.begin(), r.recurrence.end());
  for (int m = 2; m <= 40; m += 2) CHECK(rec.count(m) == 1);

  auto constant = [](int m) { return m; };
  for (int n = 1; n <= 6; ++n) {
    const auto c = sklab::construct_u_prime(n, 1.0, constant, 30);
    CHECK(c.value.u() == 1.0);
    CHECK((c.value.k() - n) % 2 == 0);
  }

  auto bad = [](int m) { return m; };
  CHECK_THROWS(sklab::construct_u_prime(2, 0.0, bad, 10));
}
