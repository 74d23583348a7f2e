#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "cbp/kernel.hpp"
#include "commands.hpp"
#include "config.hpp"

namespace {

struct Cli {
  std::string config_path;
  cbpcli::ExperimentConfig cfg;

  // string holders for list-valued flags
  std::string kernel_values_csv;
  std::string outdeg_pmf_csv;
  std::string tail_k_csv;
  std::string tail_r_csv;
};

template <typename T>
std::vector<T> parse_csv_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if constexpr (std::is_same_v<T, double>)
      out.push_back(std::stod(tok));
    else
      out.push_back(static_cast<T>(std::stoll(tok)));
  }
  return out;
}

void add_common(CLI::App* cmd, Cli& cli) {
  auto& c = cli.cfg;
  cmd->add_option("--config", cli.config_path, "JSON config file");
  cmd->add_option("--kernel-family", c.kernel_family,
                  "linear | constant | custom");
  cmd->add_option("--slope", c.kernel_slope, "linear kernel slope");
  cmd->add_option("--offset", c.kernel_offset, "kernel offset / level");
  cmd->add_option("--kernel-values", cli.kernel_values_csv,
                  "custom kernel table: f(1),f(2),...");
  cmd->add_option("--kernel-growth", c.kernel_growth,
                  "bounded | asymptotically_linear");
  cmd->add_option("--kernel-growth-param", c.kernel_growth_param,
                  "bound or asymptotic slope");
  cmd->add_option("--outdeg-type", c.outdeg_type, "degenerate | pmf | zeta");
  cmd->add_option("--outdeg-value", c.outdeg_value,
                  "degenerate out-degree value");
  cmd->add_option("--outdeg-pmf", cli.outdeg_pmf_csv,
                  "comma list: h(1),h(2),...");
  cmd->add_option("--outdeg-gamma", c.outdeg_gamma, "zeta exponent");
  cmd->add_option("--outdeg-truncation", c.outdeg_truncation,
                  "zeta truncation point");
  cmd->add_option("-n,--n", c.n, "number of vertices");
  cmd->add_option("-m,--m", c.m, "number of coupling roots");
  cmd->add_option("--replicas", c.replicas, "replica count");
  cmd->add_option("--samples", c.samples, "limit sample count");
  cmd->add_option("--damping", c.damping, "PageRank damping factor");
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--node-cap", c.node_cap, "tree node cap");
  cmd->add_option("--root-loop-convention", c.root_loop_convention,
                  "vertex 1 carries the conventional self-loop (default 1)");
  cmd->add_option("--threads", c.threads, "replica parallelism");
  cmd->add_option("--malthusian-tol", c.malthusian_tol);
  cmd->add_option("--pagerank-tol", c.pagerank_tol);
  cmd->add_option("--x-max", c.x_max, "pmf table upper end");
  cmd->add_option("--tail-k", cli.tail_k_csv, "comma list of k cells");
  cmd->add_option("--tail-r", cli.tail_r_csv, "comma list of r cells");
  cmd->add_option("--out-dir", c.out_dir, "output directory");
}

void finalize(Cli& cli) {
  if (!cli.config_path.empty())
    cbpcli::load_config_file(cli.config_path, cli.cfg);
  if (!cli.kernel_values_csv.empty())
    cli.cfg.kernel_values = parse_csv_list<double>(cli.kernel_values_csv);
  if (!cli.outdeg_pmf_csv.empty())
    cli.cfg.outdeg_pmf = parse_csv_list<double>(cli.outdeg_pmf_csv);
  if (!cli.tail_k_csv.empty())
    cli.cfg.tail_k = parse_csv_list<std::int64_t>(cli.tail_k_csv);
  if (!cli.tail_r_csv.empty())
    cli.cfg.tail_r = parse_csv_list<double>(cli.tail_r_csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cbpsim: collapsed branching process graphs, their local limits and "
      "the coupling between them"};
  app.require_subcommand(1);

  Cli cli;
  using Handler = void (*)(const cbpcli::ExperimentConfig&, std::ostream&);
  struct Sub {
    const char* name;
    const char* help;
    Handler fn;
  };
  const Sub subs[] = {
      {"malthusian", "solve the growth-rate equation for the kernel",
       cbpcli::cmd_malthusian},
      {"generate", "sample one collapsed graph and write it out",
       cbpcli::cmd_generate},
      {"couple", "estimate coupling success rates over replicas",
       cbpcli::cmd_couple},
      {"limit-sample", "sample the stopped limit tree and compare pmfs",
       cbpcli::cmd_limit_sample},
      {"compare", "graph-vs-limit frequencies, tails and diagnostics",
       cbpcli::cmd_compare},
      {"pmf", "tabulate the closed-form root in-degree pmf", cbpcli::cmd_pmf},
      {"diagnose", "birth-time and growth-bound diagnostics",
       cbpcli::cmd_diagnose},
  };
  Handler selected = nullptr;
  for (const auto& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, cli);
    cmd->callback([&selected, fn = s.fn] { selected = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    finalize(cli);
    selected(cli.cfg, std::cout);
    return 0;
  } catch (const cbpcli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cbp::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
