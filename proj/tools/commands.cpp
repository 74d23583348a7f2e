#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "cbp/analytics.hpp"
#include "cbp/collapse.hpp"
#include "cbp/coupling.hpp"
#include "cbp/kernel.hpp"
#include "cbp/limit.hpp"
#include "cbp/parallel.hpp"
#include "cbp/serialize.hpp"

namespace cbpcli {

using nlohmann::json;
using namespace cbp;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

std::string path_in(const ExperimentConfig& cfg, const char* name) {
  return cfg.out_dir + "/" + name;
}

void csv_head(std::ofstream& f, const ExperimentConfig& cfg,
              const std::string& columns) {
  f << "# config_hash=" << cfg.hash() << "\n" << columns << "\n";
}

double binom_se(double p, double n) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

// resolved model echo: what the experiment actually ran with
json model_info(const ExperimentConfig& cfg) {
  const auto dist = cfg.out_degree();
  json j;
  j["kernel"] = cfg.kernel().describe();
  j["out_degree"] = {{"type", cfg.outdeg_type},
                     {"mean", dist.mean()},
                     {"max_support", dist.max_support()}};
  if (cfg.outdeg_type == "zeta") {
    j["out_degree"]["gamma"] = dist.zeta_gamma();
    j["out_degree"]["truncation"] = dist.zeta_truncation();
  }
  return j;
}

struct GraphBundle {
  std::vector<std::int32_t> dplus;
  std::vector<NodeId> prefix;
  LiftedRun run;
  CollapsedGraph graph;
};

GraphBundle build_graph(const ExperimentConfig& cfg) {
  GraphBundle b;
  const auto kernel = cfg.kernel();
  const auto dist = cfg.out_degree();
  RngStream base(cfg.seed);
  RngStream s0 = base.child(0), s1 = base.child(1);
  auto [dp, prefix] = sample_out_degrees(dist, cfg.n, s0);
  b.dplus = std::move(dp);
  b.prefix = std::move(prefix);
  b.run = grow_lifted_run(kernel, b.prefix.back(), b.prefix, s1);
  b.run.rng_seed = cfg.seed;
  b.graph = collapse_run(b.run, b.dplus, b.prefix, cfg.root_loop_convention);
  return b;
}

struct LimitRow {
  double chi = 0.0;
  std::int64_t size = 0;
  std::int64_t n_root = 0;
  double r_root = 0.0;
  bool discarded = false;
  std::string code;  // canonical code when small enough to matter
};

std::vector<LimitRow> sample_limit_rows(const ExperimentConfig& cfg,
                                        double lambda,
                                        std::int64_t code_size_cap) {
  const auto kernel = cfg.kernel();
  const auto dist = cfg.out_degree();
  std::vector<LimitRow> rows(static_cast<size_t>(cfg.samples));
  const RngStream base = RngStream(cfg.seed).child(2);
  parallel_replicas(cfg.samples, cfg.threads, [&](std::int64_t i) {
    RngStream st = base.child(static_cast<std::uint64_t>(i));
    const auto t = sample_stopped_tree(kernel, dist, lambda, st, cfg.node_cap);
    LimitRow& row = rows[static_cast<size_t>(i)];
    row.chi = t.chi;
    if (t.capped) {
      row.discarded = true;
      return;
    }
    row.size = t.tree.size();
    row.n_root = root_in_degree(t);
    row.r_root = root_pagerank(t, cfg.damping);
    if (row.size <= code_size_cap)
      row.code = canonical_code(local_from_tree(t.tree, t.chi));
  });
  return rows;
}

}  // namespace

void cmd_malthusian(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto kernel = cfg.kernel();
  const auto mr = malthusian_rate(kernel, cfg.malthusian_tol);
  json j;
  j["lambda"] = mr.lambda;
  j["residual"] = mr.residual;
  j["bracket"] = {mr.bracket.first, mr.bracket.second};
  j["theta_lower"] = kernel.theta_lower();
  j["kernel"] = kernel.describe();
  j["config_hash"] = cfg.hash();
  out << j.dump() << "\n";
}

void cmd_generate(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const GraphBundle b = build_graph(cfg);

  const std::string gpath = path_in(cfg, "graph.json");
  {
    auto f = open_out(gpath);
    json j = json::parse(graph_to_json(b.graph));
    j["config_hash"] = cfg.hash();
    f << j.dump() << "\n";
  }
  std::string dpath;
  if (cfg.n <= 200) {
    dpath = path_in(cfg, "graph.dot");
    open_out(dpath) << "// config_hash=" << cfg.hash() << "\n"
                    << graph_to_dot(b.graph);
  }

  std::int64_t max_in = 0;
  for (VertexId v = 1; v <= b.graph.n; ++v)
    max_in = std::max(max_in, b.graph.in_mult[static_cast<size_t>(v)]);

  json j;
  j["n"] = cfg.n;
  j["s_n"] = b.prefix.back();
  j["edge_multiplicity_total"] = b.graph.total_multiplicity();
  j["edge_records"] = b.graph.edges.size();
  j["max_in_degree"] = max_in;
  j["graph_file"] = gpath;
  if (!dpath.empty()) j["dot_file"] = dpath;
  j["config_hash"] = cfg.hash();
  out << j.dump() << "\n";
}

void cmd_couple(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto kernel = cfg.kernel();
  const auto dist = cfg.out_degree();
  CoupleOptions opt;
  opt.node_cap = cfg.node_cap;
  const auto est =
      coupling_success_rate(kernel, dist, cfg.n, cfg.m, cfg.replicas,
                            RngStream(cfg.seed), opt, cfg.threads, true);

  {
    auto f = open_out(path_in(cfg, "couple_replicas.csv"));
    csv_head(f, cfg,
             "replica,roots,success_per_root,failure_per_root,joint_success,"
             "discarded,s_star_first,t_target_first");
    for (const auto& row : est.rows) {
      f << row.replica << ",";
      for (size_t i = 0; i < row.roots.size(); ++i)
        f << (i ? ";" : "") << row.roots[i];
      f << ",";
      for (size_t i = 0; i < row.success.size(); ++i)
        f << (i ? ";" : "") << static_cast<int>(row.success[i]);
      f << ",";
      for (size_t i = 0; i < row.failure.size(); ++i)
        f << (i ? ";" : "")
          << coupling_failure_name(
                 static_cast<CouplingFailure>(row.failure[i]));
      f << "," << (row.joint_success ? 1 : 0) << "," << (row.discarded ? 1 : 0)
        << "," << format_g17(row.s_star_first) << ","
        << format_g17(row.t_target_first) << "\n";
    }
  }

  json j;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["replicas"] = est.replicas;
  j["kept"] = est.kept;
  j["discarded"] = est.discarded;
  j["joint_success"] = {{"estimate", est.joint.estimate},
                        {"wilson_lo", est.joint.lo},
                        {"wilson_hi", est.joint.hi}};
  j["first_root_success"] = {{"estimate", est.first_root.estimate},
                             {"wilson_lo", est.first_root.lo},
                             {"wilson_hi", est.first_root.hi}};
  j["model"] = model_info(cfg);
  j["config_hash"] = cfg.hash();
  open_out(path_in(cfg, "couple_summary.json")) << j.dump() << "\n";
  out << j.dump() << "\n";
}

void cmd_limit_sample(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto kernel = cfg.kernel();
  const auto dist = cfg.out_degree();
  const double lambda = malthusian_rate(kernel, cfg.malthusian_tol).lambda;
  const auto rows = sample_limit_rows(cfg, lambda, 0);

  std::int64_t discarded = 0;
  EmpiricalDistribution nroot;
  {
    auto f = open_out(path_in(cfg, "limit_samples.csv"));
    csv_head(f, cfg, "chi,size,N_root,R_root");
    for (const auto& row : rows) {
      if (row.discarded) {
        ++discarded;
        continue;
      }
      nroot.add(row.n_root);
      f << format_g17(row.chi) << "," << row.size << "," << row.n_root << ","
        << format_g17(row.r_root) << "\n";
    }
  }

  json j;
  j["lambda"] = lambda;
  j["samples"] = cfg.samples;
  j["discarded"] = discarded;
  j["discard_rate"] =
      static_cast<double>(discarded) / static_cast<double>(cfg.samples);
  j["model_info"] = model_info(cfg);

  // closed-form comparison when the kernel family admits one
  std::string model;
  if (cfg.kernel_family == "linear" && cfg.kernel_slope > 0.0 &&
      cfg.pa_beta_effective() > -1.0)
    model = "preferential";
  else if (cfg.kernel_family == "constant")
    model = "uniform";
  if (!model.empty()) {
    std::vector<double> pmf;
    for (std::int64_t x = 0; x <= cfg.x_max; ++x)
      pmf.push_back(model == "preferential"
                        ? closed_form_pa_pmf(cfg.pa_beta_effective(), dist, x)
                        : closed_form_ua_pmf(dist, x));
    auto f = open_out(path_in(cfg, "pmf_compare.csv"));
    csv_head(f, cfg, "x,empirical,closed_form");
    for (std::int64_t x = 0; x <= cfg.x_max; ++x)
      f << x << "," << format_g17(nroot.prob(x)) << ","
        << format_g17(pmf[static_cast<size_t>(x)]) << "\n";
    j["model"] = model;
    j["tv_distance"] = tv_distance(nroot, pmf);
  }
  j["config_hash"] = cfg.hash();
  open_out(path_in(cfg, "limit_summary.json")) << j.dump() << "\n";
  out << j.dump() << "\n";
}

void cmd_compare(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto kernel = cfg.kernel();
  const auto dist = cfg.out_degree();
  const double lambda = malthusian_rate(kernel, cfg.malthusian_tol).lambda;

  const GraphBundle b = build_graph(cfg);
  const auto pr = graph_pagerank(b.graph, cfg.damping, cfg.pagerank_tol);

  // limit-side sampling; codes retained for trees small enough to match a
  // target
  std::int64_t max_target = 1;
  for (const auto& t : cfg.targets)
    max_target = std::max<std::int64_t>(
        max_target, static_cast<std::int64_t>(t.marks.size()));
  const auto rows = sample_limit_rows(cfg, lambda, max_target);
  std::int64_t kept = 0, discarded = 0;
  for (const auto& r : rows) r.discarded ? ++discarded : ++kept;

  json report;
  report["lambda"] = lambda;
  report["n"] = cfg.n;
  report["samples"] = cfg.samples;
  report["limit_discarded"] = discarded;
  report["pagerank_iterations"] = pr.iterations;

  // neighborhood frequencies: graph fraction vs limit Monte Carlo
  json neigh = json::array();
  {
    auto f = open_out(path_in(cfg, "neighborhood.csv"));
    csv_head(f, cfg,
             "target,size,graph_freq,limit_freq,se_graph,se_limit,delta");
    for (size_t ti = 0; ti < cfg.targets.size(); ++ti) {
      const auto target = local_tree_target(cfg.targets[ti].parents,
                                            cfg.targets[ti].marks);
      const auto code = canonical_code(target);
      const double gf = neighborhood_frequency(b.graph, target);
      std::int64_t hits = 0;
      for (const auto& r : rows)
        if (!r.discarded && !r.code.empty() && r.code == code) ++hits;
      const double lf =
          static_cast<double>(hits) / static_cast<double>(kept);
      const double seg = binom_se(gf, static_cast<double>(cfg.n));
      const double sel = binom_se(lf, static_cast<double>(kept));
      f << ti << "," << target.size() << "," << format_g17(gf) << ","
        << format_g17(lf) << "," << format_g17(seg) << "," << format_g17(sel)
        << "," << format_g17(gf - lf) << "\n";
      neigh.push_back({{"target", ti},
                       {"graph_freq", gf},
                       {"limit_freq", lf},
                       {"se_graph", seg},
                       {"se_limit", sel}});
    }
  }
  report["neighborhood"] = std::move(neigh);

  // joint in-degree / pagerank tails on the configured grid
  json tails = json::array();
  {
    auto f = open_out(path_in(cfg, "joint_tails.csv"));
    csv_head(f, cfg, "k,r,graph_freq,limit_freq,delta");
    for (const auto k : cfg.tail_k) {
      for (const auto r : cfg.tail_r) {
        const double gf = joint_tail_frequency(b.graph, pr, k, r);
        std::int64_t hits = 0;
        for (const auto& row : rows)
          if (!row.discarded && row.n_root >= k && row.r_root > r) ++hits;
        const double lf =
            static_cast<double>(hits) / static_cast<double>(kept);
        f << k << "," << format_g17(r) << "," << format_g17(gf) << ","
          << format_g17(lf) << "," << format_g17(gf - lf) << "\n";
        tails.push_back(
            {{"k", k}, {"r", r}, {"graph_freq", gf}, {"limit_freq", lf}});
      }
    }
  }
  report["joint_tails"] = std::move(tails);

  // diagnostics: birth-time deviations and the expectation bound
  json diag = json::array();
  {
    auto f = open_out(path_in(cfg, "diagnostics.csv"));
    csv_head(f, cfg, "kind,arg,value,extra1,extra2");
    for (const auto& row : birth_time_diagnostic(b.run, lambda)) {
      f << "birth_time_sup," << row.m << "," << format_g17(row.sup_deviation)
        << ",,\n";
      diag.push_back({{"kind", "birth_time_sup"},
                      {"m", row.m},
                      {"value", row.sup_deviation}});
    }
    const auto bounds = expectation_bound_check(
        kernel, dist, {0.25, 0.5, 1.0},
        std::min<std::int64_t>(cfg.samples, 10000),
        RngStream(cfg.seed).child(3), cfg.node_cap);
    for (const auto& row : bounds) {
      f << "expectation_bound," << format_g17(row.t) << ","
        << format_g17(row.empirical_mean) << "," << format_g17(row.bound)
        << "," << (row.violated ? 1 : 0) << "\n";
      diag.push_back({{"kind", "expectation_bound"},
                      {"t", row.t},
                      {"mean", row.empirical_mean},
                      {"bound", row.bound},
                      {"violated", row.violated}});
    }
  }
  report["diagnostics"] = std::move(diag);
  report["model"] = model_info(cfg);
  report["config_hash"] = cfg.hash();
  open_out(path_in(cfg, "compare_report.json")) << report.dump() << "\n";

  json j;
  j["report_file"] = path_in(cfg, "compare_report.json");
  j["lambda"] = lambda;
  j["limit_discarded"] = discarded;
  j["config_hash"] = cfg.hash();
  out << j.dump() << "\n";
}

void cmd_pmf(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto dist = cfg.out_degree();
  std::string model;
  if (cfg.kernel_family == "constant") {
    model = "uniform";
  } else if (cfg.kernel_family == "linear" && cfg.kernel_slope > 0.0) {
    if (cfg.pa_beta_effective() <= -1.0)
      throw ConfigError("gamma-ratio pmf requires offset/slope > -1");
    model = "preferential";
  } else {
    throw ConfigError("closed-form pmf exists for linear or constant kernels");
  }

  double total = 0.0;
  {
    auto f = open_out(path_in(cfg, "pmf.csv"));
    csv_head(f, cfg, "x,prob");
    for (std::int64_t x = 0; x <= cfg.x_max; ++x) {
      const double p =
          model == "preferential"
              ? closed_form_pa_pmf(cfg.pa_beta_effective(), dist, x)
              : closed_form_ua_pmf(dist, x);
      total += p;
      f << x << "," << format_g17(p) << "\n";
    }
  }
  json j;
  j["model"] = model;
  j["x_max"] = cfg.x_max;
  j["mass_in_window"] = total;
  j["config_hash"] = cfg.hash();
  out << j.dump() << "\n";
}

void cmd_diagnose(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto kernel = cfg.kernel();
  const auto dist = cfg.out_degree();
  const double lambda = malthusian_rate(kernel, cfg.malthusian_tol).lambda;
  const GraphBundle b = build_graph(cfg);

  {
    auto f = open_out(path_in(cfg, "birth_times.csv"));
    csv_head(f, cfg, "m,sup_deviation");
    for (const auto& row : birth_time_diagnostic(b.run, lambda))
      f << row.m << "," << format_g17(row.sup_deviation) << "\n";
  }
  {
    auto f = open_out(path_in(cfg, "expectation_bound.csv"));
    csv_head(f, cfg, "t,mean,se,bound,violated");
    for (const auto& row : expectation_bound_check(
             kernel, dist, {0.25, 0.5, 1.0},
             std::min<std::int64_t>(cfg.samples, 10000),
             RngStream(cfg.seed).child(3), cfg.node_cap))
      f << format_g17(row.t) << "," << format_g17(row.empirical_mean) << ","
        << format_g17(row.standard_error) << "," << format_g17(row.bound)
        << "," << (row.violated ? 1 : 0) << "\n";
  }

  // tail scan of the root in-degree (positive part)
  std::vector<double> xs(static_cast<size_t>(cfg.samples), 0.0);
  const RngStream base = RngStream(cfg.seed).child(4);
  parallel_replicas(cfg.samples, cfg.threads, [&](std::int64_t i) {
    RngStream st = base.child(static_cast<std::uint64_t>(i));
    xs[static_cast<size_t>(i)] = static_cast<double>(
        sample_root_in_degree(kernel, dist, lambda, st));
  });
  std::vector<double> pos;
  for (const double x : xs)
    if (x > 0.0) pos.push_back(x);
  {
    auto f = open_out(path_in(cfg, "hill_scan.csv"));
    csv_head(f, cfg, "k_order,tail_index,bootstrap_se");
    for (const auto& est : hill_scan(pos, 10))
      f << est.k_order << "," << format_g17(est.tail_index) << ","
        << format_g17(est.bootstrap_se) << "\n";
  }

  json j;
  j["lambda"] = lambda;
  j["n"] = cfg.n;
  j["positive_root_degrees"] = pos.size();
  j["config_hash"] = cfg.hash();
  open_out(path_in(cfg, "diagnose_summary.json")) << j.dump() << "\n";
  out << j.dump() << "\n";
}

}  // namespace cbpcli
