#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sklab/configurations.hpp"
#include "sklab/rng.hpp"

namespace sklab {

/// Default ceiling on the memory taken by one set of coupling tensors.
inline constexpr std::size_t kTensorBudgetBytes = std::size_t{512} << 20;

std::size_t tensor_bytes(int size, int p_max);

/// I.i.d. standard Gaussian couplings g_{i1..ip} over ordered tuples, one
/// tensor per order p = 1..p_max, over `size` coordinates. Entry (i1..ip) of
/// order p sits at offset sum_j i_j size^(p-1-j).
class CouplingTensors {
 public:
  static CouplingTensors draw(int size, int p_max, GaussianStream& gauss,
                              std::size_t budget_bytes = kTensorBudgetBytes);

  int size() const { return size_; }
  int p_max() const { return static_cast<int>(orders_.size()); }
  std::span<const double> order(int p) const;

 private:
  int size_ = 0;
  std::vector<std::vector<double>> orders_;
};

/// Coefficients c[S], S a subset of [0, m), of
///   sum over p-tuples in [0, m)^p of g_{i1..ip} s_{i1}...s_{ip}
/// written as a multilinear polynomial (repeated indices cancel in pairs).
std::vector<double> prefix_polynomial(const CouplingTensors& g, int p, int m);

/// Coefficients over subsets of [0, m) of
///   sum over (p-1)-tuples in [0, m) of g^{(site)}_{i1..i(p-1)} s_{i1}...s_{i(p-1)},
/// where g^{(site)} sums g over the p positions at which `site` can be inserted.
std::vector<double> cavity_polynomial(const CouplingTensors& g, int p, int m, int site);

/// Point evaluations of the two polynomials above at configuration `rho` of
/// length m; used where 2^m is too large to tabulate.
double prefix_value(const CouplingTensors& g, int p, int m, Mask rho);
double cavity_value(const CouplingTensors& g, int p, int m, int site, Mask rho);

}  // namespace sklab
