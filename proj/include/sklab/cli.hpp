#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sklab/disorder.hpp"
#include "sklab/mixture.hpp"

namespace sklab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Where a subcommand gets its random overlap structure.
struct RostSource {
  /// "file", "dirichlet" (random Gram structure with Dirichlet weights) or
  /// "explicit" (built from an M-spin system).
  std::string kind = "dirichlet";
  std::string path;
  int size = 4;
  double delta = 0.05;
  double gamma = 1.0;
};

struct ExperimentConfig {
  MixtureSpec mixture = MixtureSpec::pure(2, 1.0);
  std::vector<int> sizes{4};
  int m = 4;
  std::vector<std::pair<int, int>> pairs;
  double u = 0.0;
  std::vector<double> eps{0.0, 0.25, 0.5, 1.0};
  int n_rep = 200;
  std::vector<double> t_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  double step = 0.05;
  SamplerKind sampler = SamplerKind::tensor;
  RostSource rost;
  /// Constant for the sequence-independence allowance; fitted from the
  /// window-gap check when absent.
  std::optional<double> fitted_constant;
  /// "size_split", "structure" or "both".
  std::string interp = "both";
  double margin = 4.0;
  std::uint64_t seed = 1;
  std::string output = "out";

  nlohmann::json to_json() const;
  /// Unknown keys are rejected. Relative ROSt paths resolve against base_dir.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  /// Throws InputError on replica counts below 2, sizes outside the caps or a
  /// missing ROSt file.
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// Runs `sklab <subcommand> [--config p] [--seed s] [--threads n] [--out dir]`
/// (args exclude the program name). Returns 0 when every asserted check
/// passes, 1 on a failed check and 2 on configuration or resource errors.
int run(const std::vector<std::string>& args);

}  // namespace sklab::cli
