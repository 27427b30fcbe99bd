#include "sklab/kernels.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>

#include "sklab/error.hpp"

namespace sklab::kernels {
namespace {

// Below this size the butterflies are cheaper than waking a thread team.
constexpr std::ptrdiff_t kParallelThreshold = std::ptrdiff_t{1} << 14;

void require_power_of_two(std::size_t size) {
  if (size == 0 || !std::has_single_bit(size)) {
    throw InputError("transform length must be a power of two");
  }
}

void require_size(std::size_t size, int n) {
  if (size != (std::size_t{1} << n)) throw InputError("table length must equal 2^n");
}

}  // namespace

void walsh_hadamard(std::span<double> data) {
  require_power_of_two(data.size());
  const auto size = static_cast<std::ptrdiff_t>(data.size());
  double* v = data.data();
  for (std::ptrdiff_t h = 1; h < size; h <<= 1) {
    const std::ptrdiff_t pairs = size / 2;
#pragma omp parallel for schedule(static) if (size >= kParallelThreshold)
    for (std::ptrdiff_t j = 0; j < pairs; ++j) {
      // j enumerates the lower element of each butterfly pair.
      const std::ptrdiff_t i = (j / h) * 2 * h + (j % h);
      const double x = v[i];
      const double y = v[i + h];
      v[i] = x + y;
      v[i + h] = x - y;
    }
  }
}

std::vector<double> xor_correlate(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("xor_correlate needs equal lengths");
  require_power_of_two(a.size());
  std::vector<double> fa(a.begin(), a.end());
  std::vector<double> fb(b.begin(), b.end());
  walsh_hadamard(fa);
  walsh_hadamard(fb);
  const auto size = static_cast<std::ptrdiff_t>(fa.size());
#pragma omp parallel for schedule(static) if (size >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < size; ++i) fa[i] *= fb[i];
  walsh_hadamard(fa);
  const double scale = 1.0 / static_cast<double>(size);
  for (double& x : fa) x *= scale;
  return fa;
}

std::vector<double> multilinear_eval(std::span<const double> coeffs) {
  std::vector<double> out(coeffs.begin(), coeffs.end());
  walsh_hadamard(out);
  return out;
}

std::vector<double> hamming_profile(std::span<const double> t1, std::span<const double> t2, int n) {
  require_size(t1.size(), n);
  require_size(t2.size(), n);
  const std::vector<double> c = xor_correlate(t1, t2);
  std::vector<double> z(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t m = 0; m < c.size(); ++m) z[std::popcount(m)] += c[m];
  return z;
}

std::vector<double> hamming_profile_layered(std::span<const double> t1,
                                            std::span<const double> t2, int n) {
  require_size(t1.size(), n);
  require_size(t2.size(), n);
  const std::size_t size = t1.size();
  const std::size_t layers = static_cast<std::size_t>(n) + 1;
  // ball[x * layers + e] = sum of t2[s'] over s' agreeing with x on the bits
  // not yet processed and differing from x in exactly e processed bits.
  std::vector<double> ball(size * layers, 0.0);
  for (std::size_t x = 0; x < size; ++x) ball[x * layers] = t2[x];
  std::vector<double> next(ball.size());
  for (int bit = 0; bit < n; ++bit) {
    const std::size_t flip = std::size_t{1} << bit;
    for (std::size_t x = 0; x < size; ++x) {
      const double* same = &ball[x * layers];
      const double* other = &ball[(x ^ flip) * layers];
      double* out = &next[x * layers];
      out[0] = same[0];
      for (std::size_t e = 1; e < layers; ++e) out[e] = same[e] + other[e - 1];
    }
    ball.swap(next);
  }
  std::vector<double> z(layers, 0.0);
  for (std::size_t x = 0; x < size; ++x) {
    for (std::size_t e = 0; e < layers; ++e) z[e] += t1[x] * ball[x * layers + e];
  }
  return z;
}

std::vector<double> split_hamming_profile(std::span<const double> t1,
                                          std::span<const double> t2, int n_lo, int n_hi) {
  require_size(t1.size(), n_lo + n_hi);
  require_size(t2.size(), n_lo + n_hi);
  const std::vector<double> c = xor_correlate(t1, t2);
  const std::size_t lo_mask = (std::size_t{1} << n_lo) - 1;
  std::vector<double> z(static_cast<std::size_t>((n_lo + 1) * (n_hi + 1)), 0.0);
  for (std::size_t m = 0; m < c.size(); ++m) {
    const auto d_lo = static_cast<std::size_t>(std::popcount(m & lo_mask));
    const auto d_hi = static_cast<std::size_t>(std::popcount(m >> n_lo));
    z[d_lo * static_cast<std::size_t>(n_hi + 1) + d_hi] += c[m];
  }
  return z;
}

namespace serial {

void walsh_hadamard(std::span<double> data) {
  require_power_of_two(data.size());
  const std::size_t size = data.size();
  std::vector<double> out(size, 0.0);
  for (std::size_t k = 0; k < size; ++k) {
    for (std::size_t s = 0; s < size; ++s) {
      out[k] += (std::popcount(k & s) & 1) ? -data[s] : data[s];
    }
  }
  std::copy(out.begin(), out.end(), data.begin());
}

std::vector<double> xor_correlate(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("xor_correlate needs equal lengths");
  std::vector<double> c(a.size(), 0.0);
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t m = 0; m < a.size(); ++m) c[m] += a[s] * b[s ^ m];
  }
  return c;
}

std::vector<double> multilinear_eval(std::span<const double> coeffs) {
  std::vector<double> out(coeffs.begin(), coeffs.end());
  walsh_hadamard(out);
  return out;
}

std::vector<double> hamming_profile(std::span<const double> t1, std::span<const double> t2, int n) {
  require_size(t1.size(), n);
  require_size(t2.size(), n);
  std::vector<double> z(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t s = 0; s < t1.size(); ++s) {
    for (std::size_t sp = 0; sp < t2.size(); ++sp) z[std::popcount(s ^ sp)] += t1[s] * t2[sp];
  }
  return z;
}

std::vector<double> split_hamming_profile(std::span<const double> t1,
                                          std::span<const double> t2, int n_lo, int n_hi) {
  require_size(t1.size(), n_lo + n_hi);
  require_size(t2.size(), n_lo + n_hi);
  const std::size_t lo_mask = (std::size_t{1} << n_lo) - 1;
  std::vector<double> z(static_cast<std::size_t>((n_lo + 1) * (n_hi + 1)), 0.0);
  for (std::size_t s = 0; s < t1.size(); ++s) {
    for (std::size_t sp = 0; sp < t2.size(); ++sp) {
      const std::size_t m = s ^ sp;
      const auto d_lo = static_cast<std::size_t>(std::popcount(m & lo_mask));
      const auto d_hi = static_cast<std::size_t>(std::popcount(m >> n_lo));
      z[d_lo * static_cast<std::size_t>(n_hi + 1) + d_hi] += t1[s] * t2[sp];
    }
  }
  return z;
}

}  // namespace serial
}  // namespace sklab::kernels
