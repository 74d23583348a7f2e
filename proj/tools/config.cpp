#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cbpcli {

using nlohmann::json;

cbp::AttachmentKernel ExperimentConfig::kernel() const {
  if (kernel_family == "linear")
    return cbp::AttachmentKernel::linear(kernel_slope, kernel_offset);
  if (kernel_family == "constant")
    return cbp::AttachmentKernel::constant(kernel_offset);
  if (kernel_family == "custom") {
    cbp::CustomKernelSpec spec;
    spec.values = kernel_values;
    if (kernel_growth == "bounded")
      spec.growth = cbp::GrowthClass::bounded;
    else if (kernel_growth == "asymptotically_linear")
      spec.growth = cbp::GrowthClass::asymptotically_linear;
    else
      throw ConfigError("unknown growth class: " + kernel_growth);
    spec.growth_param = kernel_growth_param;
    return cbp::AttachmentKernel::custom(spec);
  }
  throw ConfigError("unknown kernel family: " + kernel_family);
}

cbp::OutDegreeDistribution ExperimentConfig::out_degree() const {
  if (outdeg_type == "degenerate")
    return cbp::OutDegreeDistribution::degenerate(
        static_cast<std::int32_t>(outdeg_value));
  if (outdeg_type == "pmf") return cbp::OutDegreeDistribution::from_pmf(outdeg_pmf);
  if (outdeg_type == "zeta")
    return cbp::OutDegreeDistribution::zeta(outdeg_gamma, outdeg_truncation);
  throw ConfigError("unknown out-degree type: " + outdeg_type);
}

double ExperimentConfig::pa_beta_effective() const {
  if (kernel_family != "linear" || kernel_slope <= 0.0)
    throw ConfigError("gamma-ratio pmf needs a linear kernel with slope > 0");
  return kernel_offset / kernel_slope;
}

void ExperimentConfig::validate() const {
  try {
    (void)kernel();
    (void)out_degree();
  } catch (const cbp::ModelError& e) {
    throw ConfigError(e.what());
  }
  if (n < 1) throw ConfigError("n must be >= 1");
  if (m < 1) throw ConfigError("m must be >= 1");
  if (static_cast<std::int64_t>(m) > n)
    throw ConfigError("m cannot exceed n");
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (!(damping > 0.0 && damping < 1.0))
    throw ConfigError("damping must lie in (0,1)");
  if (node_cap < 2) throw ConfigError("node_cap must be >= 2");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(malthusian_tol > 0.0) || !(pagerank_tol > 0.0) || !(rho_eps > 0.0))
    throw ConfigError("tolerances must be positive");
  if (x_max < 1) throw ConfigError("x_max must be >= 1");
  for (const auto& t : targets) {
    if (t.parents.size() != t.marks.size() || t.marks.empty())
      throw ConfigError("target parents/marks must be nonempty and aligned");
    for (size_t v = 1; v < t.parents.size(); ++v)
      if (t.parents[v] < 0 || t.parents[v] >= static_cast<std::int32_t>(v))
        throw ConfigError("target parents must precede their children");
    for (const auto mk : t.marks)
      if (mk < 1) throw ConfigError("target marks must be >= 1");
  }
  for (const auto k : tail_k)
    if (k < 0) throw ConfigError("tail grid k must be >= 0");
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["kernel"] = {{"family", kernel_family},
                 {"slope", kernel_slope},
                 {"offset", kernel_offset},
                 {"values", kernel_values},
                 {"growth", kernel_growth},
                 {"growth_param", kernel_growth_param}};
  j["out_degree"] = {{"type", outdeg_type},
                     {"value", outdeg_value},
                     {"pmf", outdeg_pmf},
                     {"gamma", outdeg_gamma},
                     {"truncation", outdeg_truncation}};
  j["n"] = n;
  j["m"] = m;
  j["replicas"] = replicas;
  j["samples"] = samples;
  j["damping"] = damping;
  j["seed"] = seed;
  j["node_cap"] = node_cap;
  j["root_loop_convention"] = root_loop_convention;
  j["malthusian_tol"] = malthusian_tol;
  j["pagerank_tol"] = pagerank_tol;
  j["rho_eps"] = rho_eps;
  j["x_max"] = x_max;
  json tg = json::array();
  for (const auto& t : targets)
    tg.push_back({{"parents", t.parents}, {"marks", t.marks}});
  j["targets"] = std::move(tg);
  j["tail_k"] = tail_k;
  j["tail_r"] = tail_r;
  // threads and output paths are execution details, not part of the
  // experiment identity
  return j.dump();
}

std::string ExperimentConfig::hash() const {
  const std::string s = canonical_json();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  const auto get = [&](const json& obj, const char* key, auto& field) {
    if (obj.contains(key)) obj.at(key).get_to(field);
  };

  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    get(k, "family", cfg.kernel_family);
    get(k, "slope", cfg.kernel_slope);
    get(k, "offset", cfg.kernel_offset);
    get(k, "values", cfg.kernel_values);
    get(k, "growth", cfg.kernel_growth);
    get(k, "growth_param", cfg.kernel_growth_param);
  }
  if (j.contains("out_degree")) {
    const auto& d = j.at("out_degree");
    get(d, "type", cfg.outdeg_type);
    get(d, "value", cfg.outdeg_value);
    get(d, "pmf", cfg.outdeg_pmf);
    get(d, "gamma", cfg.outdeg_gamma);
    get(d, "truncation", cfg.outdeg_truncation);
  }
  get(j, "n", cfg.n);
  get(j, "m", cfg.m);
  get(j, "replicas", cfg.replicas);
  get(j, "samples", cfg.samples);
  get(j, "damping", cfg.damping);
  get(j, "seed", cfg.seed);
  get(j, "node_cap", cfg.node_cap);
  get(j, "root_loop_convention", cfg.root_loop_convention);
  get(j, "threads", cfg.threads);
  get(j, "malthusian_tol", cfg.malthusian_tol);
  get(j, "pagerank_tol", cfg.pagerank_tol);
  get(j, "rho_eps", cfg.rho_eps);
  get(j, "x_max", cfg.x_max);
  get(j, "tail_k", cfg.tail_k);
  get(j, "tail_r", cfg.tail_r);
  get(j, "out_dir", cfg.out_dir);
  if (j.contains("targets")) {
    cfg.targets.clear();
    for (const auto& t : j.at("targets")) {
      TargetSpec spec;
      t.at("parents").get_to(spec.parents);
      t.at("marks").get_to(spec.marks);
      cfg.targets.push_back(std::move(spec));
    }
  }
}

}  // namespace cbpcli
