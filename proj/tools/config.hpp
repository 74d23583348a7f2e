#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbp/collapse.hpp"
#include "cbp/kernel.hpp"

namespace cbpcli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TargetSpec {
  std::vector<std::int32_t> parents;  // parents[0] ignored; parents[k] < k
  std::vector<std::int32_t> marks;
};

// Everything a command needs, resolved from defaults, an optional JSON
// config file and command-line overrides (in that order of precedence).
struct ExperimentConfig {
  // kernel
  std::string kernel_family = "linear";  // linear | constant | custom
  double kernel_slope = 1.0;
  double kernel_offset = 0.0;
  std::vector<double> kernel_values;
  std::string kernel_growth = "bounded";  // bounded | asymptotically_linear
  double kernel_growth_param = 0.0;

  // out-degree law
  std::string outdeg_type = "degenerate";  // degenerate | pmf | zeta
  std::int64_t outdeg_value = 1;
  std::vector<double> outdeg_pmf;
  double outdeg_gamma = 2.5;
  std::int64_t outdeg_truncation = 1000000;

  // experiment shape
  std::int64_t n = 1000;
  int m = 1;
  std::int64_t replicas = 1000;
  std::int64_t samples = 100000;
  double damping = 0.5;
  std::uint64_t seed = 1;
  std::int64_t node_cap = 1000000;
  int threads = 1;
  bool root_loop_convention = true;

  // tolerances
  double malthusian_tol = 1e-10;
  double pagerank_tol = 1e-10;
  double rho_eps = 1e-9;

  // comparison grids
  std::int64_t x_max = 50;
  std::vector<TargetSpec> targets = {{{0}, {1}}, {{0, 0}, {1, 1}}};
  std::vector<std::int64_t> tail_k = {0, 1, 2, 5};
  std::vector<double> tail_r = {0.7, 1.3, 2.1};

  // outputs
  std::string out_dir = ".";

  // ---- resolved objects -------------------------------------------------
  cbp::AttachmentKernel kernel() const;
  cbp::OutDegreeDistribution out_degree() const;
  // effective offset for the gamma-ratio pmf: offset/slope (time rescaling
  // leaves the embedded in-degree law untouched)
  double pa_beta_effective() const;

  // full validation; throws ConfigError with a readable message
  void validate() const;

  // canonical serialization and its FNV-1a hash, recorded in every output
  std::string canonical_json() const;
  std::string hash() const;
};

// parse a JSON config file into cfg (missing keys keep their values)
void load_config_file(const std::string& path, ExperimentConfig& cfg);

}  // namespace cbpcli
