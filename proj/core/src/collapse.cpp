#include "cbp/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>

#include "cbp/analytics.hpp"

namespace cbp {

OutDegreeDistribution OutDegreeDistribution::degenerate(std::int32_t d) {
  if (d < 1) throw ModelError("out-degrees live on {1, 2, ...}");
  std::vector<double> pmf(static_cast<size_t>(d), 0.0);
  pmf.back() = 1.0;
  return from_pmf(std::move(pmf));
}

OutDegreeDistribution OutDegreeDistribution::from_pmf(std::vector<double> pmf) {
  if (pmf.empty()) throw ModelError("empty out-degree pmf");
  double sum = 0.0;
  for (const double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ModelError("out-degree pmf entries must be finite and >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ModelError("out-degree pmf must sum to 1 within 1e-12");

  OutDegreeDistribution d;
  double mean = 0.0;
  std::vector<double> cdf(pmf.size());
  double acc = 0.0;
  for (size_t i = 0; i < pmf.size(); ++i) {
    pmf[i] /= sum;
    acc += pmf[i];
    cdf[i] = acc;
    mean += static_cast<double>(i + 1) * pmf[i];
  }
  cdf.back() = 1.0;
  d.mean_ = mean;
  d.pmf_ = std::make_shared<const std::vector<double>>(std::move(pmf));
  d.cdf_ = std::make_shared<const std::vector<double>>(std::move(cdf));
  return d;
}

OutDegreeDistribution OutDegreeDistribution::zeta(double gamma,
                                                  std::int64_t truncation) {
  if (!(gamma > 1.0)) throw ModelError("zeta out-degree law requires gamma > 1");
  if (truncation < 1) throw ModelError("zeta truncation must be >= 1");
  std::vector<double> pmf(static_cast<size_t>(truncation));
  double z = 0.0;
  for (std::int64_t d = 1; d <= truncation; ++d)
    z += std::pow(static_cast<double>(d), -gamma);
  for (std::int64_t d = 1; d <= truncation; ++d)
    pmf[static_cast<size_t>(d - 1)] =
        std::pow(static_cast<double>(d), -gamma) / z;
  // exact renormalization; from_pmf re-validates
  double s = 0.0;
  for (const double p : pmf) s += p;
  for (double& p : pmf) p /= s;
  OutDegreeDistribution dist = from_pmf(std::move(pmf));
  dist.gamma_ = gamma;
  dist.truncation_ = truncation;
  return dist;
}

double OutDegreeDistribution::pmf(std::int64_t d) const {
  if (d < 1 || d > static_cast<std::int64_t>(pmf_->size())) return 0.0;
  return (*pmf_)[static_cast<size_t>(d - 1)];
}

std::int32_t OutDegreeDistribution::sample(RngStream& rng) const {
  const double u = rng.next_unit();
  const auto& cdf = *cdf_;
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return static_cast<std::int32_t>(it - cdf.begin()) + 1;
}

OutDegreeSampler OutDegreeDistribution::sampler() const {
  const auto cdf = cdf_;
  return [cdf](RngStream& rng) -> std::int32_t {
    const double u = rng.next_unit();
    const auto it = std::lower_bound(cdf->begin(), cdf->end(), u);
    return static_cast<std::int32_t>(it - cdf->begin()) + 1;
  };
}

std::pair<std::vector<std::int32_t>, std::vector<NodeId>> sample_out_degrees(
    const OutDegreeDistribution& dist, VertexId n, RngStream& rng) {
  if (n < 1) throw ModelError("sample_out_degrees requires n >= 1");
  std::vector<std::int32_t> dplus(static_cast<size_t>(n) + 1, 0);
  std::vector<NodeId> prefix(static_cast<size_t>(n) + 1, 0);
  for (VertexId i = 1; i <= n; ++i) {
    dplus[static_cast<size_t>(i)] = dist.sample(rng);
    prefix[static_cast<size_t>(i)] =
        prefix[static_cast<size_t>(i - 1)] + dplus[static_cast<size_t>(i)];
  }
  return {std::move(dplus), std::move(prefix)};
}

std::vector<VertexId> node_to_vertex(const std::vector<NodeId>& prefix) {
  if (prefix.size() < 2 || prefix.front() != 0)
    throw ModelError("bad family prefix");
  std::vector<VertexId> map(static_cast<size_t>(prefix.back()) + 1, 0);
  for (size_t i = 1; i < prefix.size(); ++i)
    for (NodeId v = prefix[i - 1] + 1; v <= prefix[i]; ++v)
      map[static_cast<size_t>(v)] = static_cast<VertexId>(i);
  return map;
}

std::int64_t CollapsedGraph::total_multiplicity() const {
  std::int64_t t = 0;
  for (const auto& e : edges) t += e.mult;
  return t;
}

namespace {

void finalize_graph(CollapsedGraph& g,
                    std::vector<std::pair<VertexId, VertexId>>& raw) {
  std::sort(raw.begin(), raw.end());
  g.edges.clear();
  for (const auto& [s, d] : raw) {
    if (!g.edges.empty() && g.edges.back().src == s && g.edges.back().dst == d)
      ++g.edges.back().mult;
    else
      g.edges.push_back(EdgeRec{s, d, 1});
  }

  const size_t sz = static_cast<size_t>(g.n) + 1;
  g.self_loops.assign(sz, 0);
  g.in_mult.assign(sz, 0);
  for (const auto& e : g.edges) {
    if (e.src == e.dst)
      g.self_loops[static_cast<size_t>(e.src)] +=
          static_cast<std::int32_t>(e.mult);
    g.in_mult[static_cast<size_t>(e.dst)] += e.mult;
  }
  g.fwd_off.assign(sz + 1, 0);
  g.rev_off.assign(sz + 1, 0);
  for (const auto& e : g.edges) {
    ++g.fwd_off[static_cast<size_t>(e.src) + 1];
    ++g.rev_off[static_cast<size_t>(e.dst) + 1];
  }
  for (size_t i = 1; i <= sz; ++i) {
    g.fwd_off[i] += g.fwd_off[i - 1];
    g.rev_off[i] += g.rev_off[i - 1];
  }
  g.fwd.assign(g.edges.size(), {});
  g.rev.assign(g.edges.size(), {});
  std::vector<std::int64_t> fpos(g.fwd_off.begin(), g.fwd_off.end());
  std::vector<std::int64_t> rpos(g.rev_off.begin(), g.rev_off.end());
  for (const auto& e : g.edges) {
    g.fwd[static_cast<size_t>(fpos[static_cast<size_t>(e.src)]++)] = {e.dst,
                                                                      e.mult};
    g.rev[static_cast<size_t>(rpos[static_cast<size_t>(e.dst)]++)] = {e.src,
                                                                      e.mult};
  }
}

}  // namespace

CollapsedGraph collapse_run(const LiftedRun& run,
                            const std::vector<std::int32_t>& dplus,
                            const std::vector<NodeId>& prefix,
                            bool root_loop_convention) {
  if (prefix.size() < 2 || prefix.front() != 0 ||
      prefix.back() != run.node_count)
    throw ModelError("collapse_run: prefix inconsistent with the run");
  if (dplus.size() != prefix.size())
    throw ModelError("collapse_run: out-degree array size mismatch");
  for (size_t i = 1; i < prefix.size(); ++i)
    if (prefix[i] - prefix[i - 1] != dplus[i])
      throw ModelError("collapse_run: out-degrees disagree with prefix sums");
  if (!run.family_prefix.empty() && run.family_prefix != prefix)
    throw ModelError("collapse_run: run carries a different family prefix");

  CollapsedGraph g;
  g.n = static_cast<VertexId>(prefix.size()) - 1;
  g.out_degree = dplus;
  g.root_loop_convention = root_loop_convention;

  const auto vmap = node_to_vertex(prefix);
  std::vector<std::pair<VertexId, VertexId>> raw;
  raw.reserve(static_cast<size_t>(run.node_count));
  if (root_loop_convention) raw.emplace_back(1, 1);  // stands in for the root
  for (NodeId v = 2; v <= run.node_count; ++v)
    raw.emplace_back(vmap[static_cast<size_t>(v)],
                     vmap[static_cast<size_t>(run.parent[static_cast<size_t>(v)])]);
  finalize_graph(g, raw);
  return g;
}

CollapsedGraph make_graph(VertexId n, std::vector<std::int32_t> dplus,
                          std::vector<EdgeRec> edges,
                          bool root_loop_convention) {
  if (n < 1) throw ModelError("make_graph requires n >= 1");
  if (static_cast<VertexId>(dplus.size()) != n + 1)
    throw ModelError("make_graph: out-degree array must be 1-based, size n+1");
  CollapsedGraph g;
  g.n = n;
  g.out_degree = std::move(dplus);
  g.root_loop_convention = root_loop_convention;
  std::vector<std::pair<VertexId, VertexId>> raw;
  for (const auto& e : edges) {
    if (e.src < 1 || e.src > n || e.dst < 1 || e.dst > n || e.mult < 1)
      throw ModelError("make_graph: bad edge record");
    for (std::int64_t k = 0; k < e.mult; ++k) raw.emplace_back(e.src, e.dst);
  }
  finalize_graph(g, raw);
  return g;
}

InComponent in_component(const CollapsedGraph& g, VertexId i,
                         std::int64_t max_vertices) {
  if (i < 1 || i > g.n) throw ModelError("in_component: vertex out of range");
  InComponent comp;
  comp.root = i;

  std::unordered_set<VertexId> seen;
  seen.reserve(64);
  std::vector<VertexId> stack{i};
  seen.insert(i);
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (std::int64_t e = g.rev_off[static_cast<size_t>(v)];
         e < g.rev_off[static_cast<size_t>(v) + 1]; ++e) {
      const VertexId u = g.rev[static_cast<size_t>(e)].first;
      if (seen.insert(u).second) {
        if (max_vertices > 0 &&
            static_cast<std::int64_t>(seen.size()) > max_vertices) {
          comp.truncated = true;
          comp.vertices.assign(seen.begin(), seen.end());
          std::sort(comp.vertices.begin(), comp.vertices.end());
          return comp;
        }
        stack.push_back(u);
      }
    }
  }

  comp.vertices.assign(seen.begin(), seen.end());
  std::sort(comp.vertices.begin(), comp.vertices.end());
  comp.marks.reserve(comp.vertices.size());
  for (const VertexId v : comp.vertices)
    comp.marks.push_back(g.out_degree[static_cast<size_t>(v)]);
  for (const VertexId v : comp.vertices)
    for (std::int64_t e = g.rev_off[static_cast<size_t>(v)];
         e < g.rev_off[static_cast<size_t>(v) + 1]; ++e)
      comp.edges.push_back(EdgeRec{g.rev[static_cast<size_t>(e)].first, v,
                                   g.rev[static_cast<size_t>(e)].second});
  std::sort(comp.edges.begin(), comp.edges.end(),
            [](const EdgeRec& a, const EdgeRec& b) {
              return a.src != b.src ? a.src < b.src : a.dst < b.dst;
            });
  return comp;
}

CollapsedGraph sequential_linear_graph(double c, double beta,
                                       const std::vector<std::int32_t>& dplus,
                                       RngStream& rng) {
  if (!(c >= 0.0) || !(c + beta > 0.0))
    throw ModelError("sequential rule requires c >= 0 and c + beta > 0");
  const VertexId n = static_cast<VertexId>(dplus.size()) - 1;
  if (n < 1) throw ModelError("sequential rule requires n >= 1");

  // deg counts self-loops twice; vertex 1 starts with its mark's worth of
  // self-loops, one of which (the conventional one) carries no attachment
  // weight because no reproducing node stands behind it
  std::vector<double> deg(static_cast<size_t>(n) + 1, 0.0);
  std::vector<std::pair<VertexId, VertexId>> raw;
  deg[1] = 2.0 * dplus[1];
  for (std::int32_t k = 0; k < dplus[1]; ++k) raw.emplace_back(1, 1);

  std::vector<double> w(static_cast<size_t>(n) + 1, 0.0);
  for (VertexId l = 2; l <= n; ++l) {
    for (std::int32_t k = 1; k <= dplus[static_cast<size_t>(l)]; ++k) {
      double total = 0.0;
      for (VertexId i = 1; i < l; ++i) {
        w[static_cast<size_t>(i)] =
            c * deg[static_cast<size_t>(i)] +
            beta * static_cast<double>(dplus[static_cast<size_t>(i)]) -
            (i == 1 ? c : 0.0);
        total += w[static_cast<size_t>(i)];
      }
      w[static_cast<size_t>(l)] =
          c * deg[static_cast<size_t>(l)] + beta * static_cast<double>(k - 1);
      total += w[static_cast<size_t>(l)];

      double r = rng.next_unit() * total;
      VertexId target = l;
      for (VertexId i = 1; i <= l; ++i) {
        r -= w[static_cast<size_t>(i)];
        if (r <= 0.0) {
          target = i;
          break;
        }
      }
      raw.emplace_back(l, target);
      deg[static_cast<size_t>(l)] += 1.0;
      deg[static_cast<size_t>(target)] += 1.0;
    }
  }

  CollapsedGraph g;
  g.n = n;
  g.out_degree = dplus;
  g.root_loop_convention = true;
  finalize_graph(g, raw);
  return g;
}

namespace {

std::string labeled_key(const CollapsedGraph& g) {
  std::ostringstream os;
  os << "d:";
  for (VertexId i = 1; i <= g.n; ++i)
    os << g.out_degree[static_cast<size_t>(i)] << ',';
  os << "|e:";
  for (const auto& e : g.edges)
    os << e.src << '>' << e.dst << 'x' << e.mult << ';';
  return os.str();
}

}  // namespace

EquivalenceReport sequential_linear_equivalence_check(
    double c, double beta, const OutDegreeDistribution& dist, VertexId n,
    std::int64_t replicas, RngStream rng) {
  if (replicas < 1) throw ModelError("replicas must be >= 1");
  const AttachmentKernel kernel = AttachmentKernel::linear(c, beta);

  std::map<std::string, std::int64_t> via_collapse, via_sequential;
  for (std::int64_t r = 0; r < replicas; ++r) {
    RngStream rep = rng.child(static_cast<std::uint64_t>(r));
    {
      RngStream s0 = rep.child(0), s1 = rep.child(1);
      auto [dp, prefix] = sample_out_degrees(dist, n, s0);
      const LiftedRun run = grow_lifted_run(kernel, prefix.back(), prefix, s1);
      ++via_collapse[labeled_key(collapse_run(run, dp, prefix))];
    }
    {
      RngStream s0 = rep.child(2), s1 = rep.child(3);
      auto [dp, prefix] = sample_out_degrees(dist, n, s0);
      (void)prefix;
      ++via_sequential[labeled_key(sequential_linear_graph(c, beta, dp, s1))];
    }
  }

  const ChiSquareResult cs = chi_square_two_sample(via_collapse, via_sequential);
  EquivalenceReport rep;
  rep.statistic = cs.statistic;
  rep.df = cs.df;
  rep.p_value = cs.p_value;
  rep.classes = cs.categories;
  rep.replicas = replicas;
  return rep;
}

}  // namespace cbp
