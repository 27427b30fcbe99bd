#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sklab/kernels.hpp"

namespace k = sklab::kernels;

namespace {

std::vector<double> random_vector(std::size_t size, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(size);
  for (double& x : v) x = u(rng);
  return v;
}

double max_rel_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return worst;
}

}  // namespace

TEST_CASE("Walsh-Hadamard transform matches the direct sum and inverts") {
  std::mt19937_64 rng(7);
  for (int n = 0; n <= 9; ++n) {
    const auto x = random_vector(std::size_t{1} << n, rng);
    auto fast = x;
    k::walsh_hadamard(fast);
    auto slow = x;
    k::serial::walsh_hadamard(slow);
    CHECK(max_rel_gap(fast, slow) < 1e-12);
    k::walsh_hadamard(fast);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(fast[i] / x.size() == doctest::Approx(x[i]).epsilon(1e-12));
  }
  std::vector<double> bad(3);
  CHECK_THROWS(k::walsh_hadamard(bad));
}

TEST_CASE("parallel path agrees with the serial reference on a large array") {
  std::mt19937_64 rng(11);
  const auto x = random_vector(std::size_t{1} << 15, rng);
  auto fast = x;
  k::walsh_hadamard(fast);
  auto slow = x;
  k::serial::walsh_hadamard(slow);
  CHECK(max_rel_gap(fast, slow) < 1e-10);
}

TEST_CASE("xor correlation") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 7; ++n) {
    const auto a = random_vector(std::size_t{1} << n, rng);
    const auto b = random_vector(std::size_t{1} << n, rng);
    CHECK(max_rel_gap(k::xor_correlate(a, b), k::serial::xor_correlate(a, b)) < 1e-12);
  }
}

TEST_CASE("multilinear evaluation in spin variables") {
  std::mt19937_64 rng(5);
  const int n = 5;
  const auto coeffs = random_vector(std::size_t{1} << n, rng);
  const auto values = k::multilinear_eval(coeffs);
  for (std::uint32_t s = 0; s < (1U << n); ++s) {
    double direct = 0.0;
    for (std::uint32_t set = 0; set < (1U << n); ++set) {
      double prod = 1.0;
      for (int i = 0; i < n; ++i) {
        if ((set >> i) & 1U) prod *= oracle::spin(s, i);
      }
      direct += coeffs[set] * prod;
    }
    CHECK(values[s] == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("Hamming profiles: transform, layered and direct agree") {
  std::mt19937_64 rng(9);
  for (int n = 1; n <= 7; ++n) {
    const auto t1 = random_vector(std::size_t{1} << n, rng, 0.1, 2.0);
    const auto t2 = random_vector(std::size_t{1} << n, rng, 0.1, 2.0);
    const auto slow = k::serial::hamming_profile(t1, t2, n);
    CHECK(max_rel_gap(k::hamming_profile(t1, t2, n), slow) < 1e-12);
    CHECK(max_rel_gap(k::hamming_profile_layered(t1, t2, n), slow) < 1e-12);
    double total = 0.0, s1 = 0.0, s2 = 0.0;
    for (double v : slow) total += v;
    for (double v : t1) s1 += v;
    for (double v : t2) s2 += v;
    CHECK(total == doctest::Approx(s1 * s2).epsilon(1e-12));
  }
}

TEST_CASE("split Hamming profile") {
  std::mt19937_64 rng(13);
  for (auto [lo, hi] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{4, 2}}) {
    const std::size_t size = std::size_t{1} << (lo + hi);
    const auto t1 = random_vector(size, rng, 0.1, 2.0);
    const auto t2 = random_vector(size, rng, 0.1, 2.0);
    const auto fast = k::split_hamming_profile(t1, t2, lo, hi);
    CHECK(max_rel_gap(fast, k::serial::split_hamming_profile(t1, t2, lo, hi)) < 1e-12);
    const auto joint = k::hamming_profile(t1, t2, lo + hi);
    for (int d = 0; d <= lo + hi; ++d) {
      double sum = 0.0;
      for (int a = 0; a <= lo; ++a) {
        if (d - a >= 0 && d - a <= hi) sum += fast[a * (hi + 1) + (d - a)];
      }
      CHECK(sum == doctest::Approx(joint[d]).epsilon(1e-12));
    }
  }
}
