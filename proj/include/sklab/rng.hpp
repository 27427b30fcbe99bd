#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace sklab {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based split of a root seed: stream `index` of `root`. Replica r of
/// an experiment uses derive_seed(root, r); sub-streams inside a replica use
/// derive_seed(replica_seed, purpose).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

/// Standard normal draws from a seeded engine.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() { return normal_(engine_); }
  void fill(std::span<double> out) {
    for (double& x : out) x = normal_(engine_);
  }
  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sklab
