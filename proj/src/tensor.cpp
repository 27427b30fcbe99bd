#include "sklab/tensor.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "sklab/error.hpp"

namespace sklab {
namespace {

// Visits every p-tuple over [0, m), optionally with slot `fixed_pos` pinned to
// `fixed_site`, passing the flat tensor offset and the parity mask of the free
// entries.
template <class Visit>
void visit_tuples(int p, int m, int size, int fixed_pos, int fixed_site, Visit&& visit) {
  auto rec = [&](auto&& self, int slot, std::size_t offset, Mask mask) -> void {
    if (slot == p) {
      visit(offset, mask);
      return;
    }
    if (slot == fixed_pos) {
      self(self, slot + 1, offset * static_cast<std::size_t>(size) + static_cast<std::size_t>(fixed_site), mask);
      return;
    }
    for (int i = 0; i < m; ++i) {
      self(self, slot + 1, offset * static_cast<std::size_t>(size) + static_cast<std::size_t>(i),
           mask ^ (Mask{1} << i));
    }
  };
  rec(rec, 0, 0, 0);
}

void check_order(const CouplingTensors& g, int p, int m) {
  if (p < 1 || p > g.p_max()) throw DomainError("tensor order out of range");
  if (m < 0 || m > g.size() || m > kMaxSpins) throw DomainError("prefix length out of range");
}

}  // namespace

std::size_t tensor_bytes(int size, int p_max) {
  double total = 0.0;
  for (int p = 1; p <= p_max; ++p) total += std::pow(static_cast<double>(size), p);
  return static_cast<std::size_t>(total * sizeof(double));
}

CouplingTensors CouplingTensors::draw(int size, int p_max, GaussianStream& gauss,
                                      std::size_t budget_bytes) {
  if (size < 1 || p_max < 1) throw DomainError("tensor size and order must be positive");
  const std::size_t bytes = tensor_bytes(size, p_max);
  if (bytes > budget_bytes) {
    throw ResourceError("coupling tensors need " + std::to_string(bytes >> 20) +
                        " MiB (budget " + std::to_string(budget_bytes >> 20) +
                        " MiB); use the process sampler or lower p_max");
  }
  CouplingTensors g;
  g.size_ = size;
  g.orders_.resize(static_cast<std::size_t>(p_max));
  std::size_t count = 1;
  for (auto& order : g.orders_) {
    count *= static_cast<std::size_t>(size);
    order.resize(count);
    gauss.fill(order);
  }
  return g;
}

std::span<const double> CouplingTensors::order(int p) const {
  if (p < 1 || p > p_max()) throw DomainError("tensor order out of range");
  return orders_[static_cast<std::size_t>(p - 1)];
}

std::vector<double> prefix_polynomial(const CouplingTensors& g, int p, int m) {
  check_order(g, p, m);
  const auto data = g.order(p);
  std::vector<double> coeffs(std::size_t{1} << m, 0.0);
  visit_tuples(p, m, g.size(), -1, 0, [&](std::size_t offset, Mask mask) { coeffs[mask] += data[offset]; });
  return coeffs;
}

std::vector<double> cavity_polynomial(const CouplingTensors& g, int p, int m, int site) {
  check_order(g, p, m);
  if (site < m || site >= g.size()) throw DomainError("cavity site must lie outside the prefix");
  const auto data = g.order(p);
  std::vector<double> coeffs(std::size_t{1} << m, 0.0);
  for (int pos = 0; pos < p; ++pos) {
    visit_tuples(p, m, g.size(), pos, site, [&](std::size_t offset, Mask mask) { coeffs[mask] += data[offset]; });
  }
  return coeffs;
}

double prefix_value(const CouplingTensors& g, int p, int m, Mask rho) {
  check_order(g, p, m);
  const auto data = g.order(p);
  double acc = 0.0;
  visit_tuples(p, m, g.size(), -1, 0, [&](std::size_t offset, Mask mask) {
    acc += (std::popcount(mask & rho) & 1) ? -data[offset] : data[offset];
  });
  return acc;
}

double cavity_value(const CouplingTensors& g, int p, int m, int site, Mask rho) {
  check_order(g, p, m);
  if (site < m || site >= g.size()) throw DomainError("cavity site must lie outside the prefix");
  const auto data = g.order(p);
  double acc = 0.0;
  for (int pos = 0; pos < p; ++pos) {
    visit_tuples(p, m, g.size(), pos, site, [&](std::size_t offset, Mask mask) {
      acc += (std::popcount(mask & rho) & 1) ? -data[offset] : data[offset];
    });
  }
  return acc;
}

}  // namespace sklab
