#pragma once

#include <span>
#include <vector>

// Dense transforms over functions on {0,1}^n (indexed by bitmask).
//
// The top-level functions are the production kernels (OpenMP over the inner
// butterflies once the array is large enough). `serial::` holds the direct
// reference definitions used by the tests and the benchmark; they are O(4^n)
// and exist only to be obviously correct.
namespace sklab::kernels {

/// In-place unnormalized Walsh-Hadamard transform; size must be a power of two.
void walsh_hadamard(std::span<double> data);

/// c[m] = sum_s a[s] b[s ^ m].
std::vector<double> xor_correlate(std::span<const double> a, std::span<const double> b);

/// values[s] = sum_S coeffs[S] (-1)^{|S & s|}: evaluates a multilinear
/// polynomial in the spins (spin i = -1 iff bit i of s is set).
std::vector<double> multilinear_eval(std::span<const double> coeffs);

/// z[d] = sum over (s, s') with popcount(s ^ s') = d of t1[s] t2[s'].
std::vector<double> hamming_profile(std::span<const double> t1, std::span<const double> t2, int n);

/// Same quantity via a layered Hamming-ball recursion that only adds positive
/// numbers: O(n^2 2^n), no cancellation.
std::vector<double> hamming_profile_layered(std::span<const double> t1,
                                            std::span<const double> t2, int n);

/// z[d_lo * (n_hi + 1) + d_hi]: pair sums split by disagreements among the
/// low `n_lo` bits and the high `n_hi` bits.
std::vector<double> split_hamming_profile(std::span<const double> t1,
                                          std::span<const double> t2, int n_lo, int n_hi);

namespace serial {

void walsh_hadamard(std::span<double> data);
std::vector<double> xor_correlate(std::span<const double> a, std::span<const double> b);
std::vector<double> multilinear_eval(std::span<const double> coeffs);
std::vector<double> hamming_profile(std::span<const double> t1, std::span<const double> t2, int n);
std::vector<double> split_hamming_profile(std::span<const double> t1,
                                          std::span<const double> t2, int n_lo, int n_hi);

}  // namespace serial
}  // namespace sklab::kernels
