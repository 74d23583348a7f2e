#include "cbp/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "cbp/parallel.hpp"

namespace cbp {

namespace {

// stream keys within a coupling's base stream
constexpr std::uint64_t kRegrowTag = 8;  // .child(vertex id)
constexpr std::uint64_t kDummyTag = 9;   // .child(node id)
constexpr std::uint64_t kContTag = 10;   // .child(root vertex)

struct DummyRec {
  VertexId at_vertex = 0;     // vertex in J the extra edge pointed to
  std::int32_t slot = 0;      // slot of that vertex's node the edge hit
  double tau = 0.0;           // birth time in the coupled tree
  NodeId key_node = 0;        // originating node, keys the rng stream
};

CouplingOutcome couple_one(const LiftedRun& run, const CollapsedGraph& g,
                           const std::vector<VertexId>& vmap, VertexId i,
                           double lambda, const AttachmentKernel& kernel,
                           const OutDegreeDistribution& dist,
                           const RngStream& base,
                           const std::vector<std::uint8_t>* explored_before,
                           const CoupleOptions& opt) {
  if (i < 1 || i > g.n) throw ModelError("coupling root out of range");
  if (!(lambda > 0.0)) throw ModelError("lambda must be positive");

  CouplingOutcome out;
  out.root = i;
  out.t_target =
      std::log(static_cast<double>(g.n) / static_cast<double>(i)) / lambda;
  const double horizon = std::max(out.t_target, opt.tree_horizon);
  out.tree_valid_until = horizon;

  const InComponent comp = in_component(g, i);
  out.component = comp.vertices;

  MarkedTree tree =
      MarkedTree::single_root(g.out_degree[static_cast<size_t>(i)], 0.0);
  std::vector<std::uint8_t> in_j(static_cast<size_t>(g.n) + 1, 0);
  std::vector<NodeId> tree_of(static_cast<size_t>(g.n) + 1, 0);
  std::vector<std::pair<VertexId, NodeId>> jstar_nodes;
  std::vector<DummyRec> dummies;
  double s_star = 0.0;
  VertexId kappa_star = i;

  // root classification: the root joins J only when its family produced no
  // self-loop
  // (vertex 1's conventional loop counts as one, so vertex 1 miscouples)
  if (g.self_loops[static_cast<size_t>(i)] == 0) {
    out.J.push_back(i);
    in_j[static_cast<size_t>(i)] = 1;
    tree_of[static_cast<size_t>(i)] = 1;

    // exploration of the component in age order
    std::vector<NodeId> into_j;
    for (size_t jj = 1; jj < comp.vertices.size(); ++jj) {
      const VertexId kv = comp.vertices[jj];
      const NodeId first = run.family_prefix[static_cast<size_t>(kv - 1)] + 1;
      const NodeId last = run.family_prefix[static_cast<size_t>(kv)];
      bool self_loop = false;
      std::int64_t union_edges = 0;
      into_j.clear();
      for (NodeId v = first; v <= last; ++v) {
        const VertexId pv =
            vmap[static_cast<size_t>(run.parent[static_cast<size_t>(v)])];
        if (pv == kv) self_loop = true;
        const bool in_cur = in_j[static_cast<size_t>(pv)] != 0;
        const bool in_prev =
            explored_before && (*explored_before)[static_cast<size_t>(pv)];
        if (in_cur) into_j.push_back(v);
        if (in_cur || in_prev) ++union_edges;
      }
      if (into_j.empty()) continue;  // skipped family, clock untouched

      // copy the oldest attaching node's time offset onto the tree
      const NodeId omega = into_j.front();
      const double tau =
          s_star + run.sigma[static_cast<size_t>(omega)] -
          run.sigma[static_cast<size_t>(
              run.family_prefix[static_cast<size_t>(kappa_star)])];
      const VertexId pvert =
          vmap[static_cast<size_t>(run.parent[static_cast<size_t>(omega)])];
      const NodeId pnode = tree_of[static_cast<size_t>(pvert)];
      const std::int32_t slot = static_cast<std::int32_t>(
          run.parent[static_cast<size_t>(omega)] -
          run.family_prefix[static_cast<size_t>(pvert - 1)]);
      const NodeId jnode = tree.add_child(
          pnode, slot, g.out_degree[static_cast<size_t>(kv)], tau);
      s_star = tau;

      // classification: a second edge into the already-coupled set (or a
      // self-loop) breaks the tree structure
      if (!self_loop && union_edges < 2) {
        out.J.push_back(kv);
        in_j[static_cast<size_t>(kv)] = 1;
        tree_of[static_cast<size_t>(kv)] = jnode;
      } else {
        out.J_star.push_back(kv);
        jstar_nodes.emplace_back(kv, jnode);
        for (size_t q = 1; q < into_j.size(); ++q) {
          const NodeId w = into_j[q];
          const VertexId av =
              vmap[static_cast<size_t>(run.parent[static_cast<size_t>(w)])];
          dummies.push_back(
              DummyRec{av,
                       static_cast<std::int32_t>(
                           run.parent[static_cast<size_t>(w)] -
                           run.family_prefix[static_cast<size_t>(av - 1)]),
                       s_star + run.sigma[static_cast<size_t>(w)] -
                           run.sigma[static_cast<size_t>(omega)],
                       w});
        }
      }
      kappa_star = kv;
    }
  } else {
    out.J_star.push_back(i);
    jstar_nodes.emplace_back(i, NodeId{1});
  }

  // stretch the clock to the end of the run
  s_star += run.sigma[static_cast<size_t>(run.node_count)] -
            run.sigma[static_cast<size_t>(
                run.family_prefix[static_cast<size_t>(kappa_star)])];
  out.s_star = s_star;
  out.dummy_count = static_cast<std::int64_t>(dummies.size());

  const OutDegreeSampler sampler = dist.sampler();
  const double materialize_to = std::min(s_star, horizon);

  // regrowth: miscoupled vertices restart as fresh trees from their birth;
  // streams keyed by vertex id so joint constructions reuse the same copies
  for (const auto& [kv, node] : jstar_nodes) {
    RngStream st = base.child(kRegrowTag).child(static_cast<std::uint64_t>(kv));
    const double tau = tree.node(node).birth_time;
    const double dur = std::max(0.0, materialize_to - tau);
    MarkedTree sub = grow_marked_ctbp(kernel, sampler, dur, st, opt.node_cap,
                                      tree.node(node).mark);
    tree.graft(node, sub, tau);
  }
  // dummies draw an independent mark and evolve for (s_star - tau)+
  for (const DummyRec& d : dummies) {
    RngStream st =
        base.child(kDummyTag).child(static_cast<std::uint64_t>(d.key_node));
    const std::int32_t mark = dist.sample(st);
    const NodeId node = tree.add_child(
        tree_of[static_cast<size_t>(d.at_vertex)], d.slot, mark, d.tau);
    const double dur = std::max(0.0, materialize_to - d.tau);
    if (dur > 0.0) {
      MarkedTree sub =
          grow_marked_ctbp(kernel, sampler, dur, st, opt.node_cap, mark);
      tree.graft(node, sub, d.tau);
    }
  }
  // let the whole tree keep evolving when the construction ended early
  if (s_star < horizon && !tree.capped()) {
    RngStream st = base.child(kContTag).child(static_cast<std::uint64_t>(i));
    evolve_marked_tree(tree, kernel, sampler, s_star, horizon, st,
                       opt.node_cap);
  }

  out.capped = tree.capped();

  // marks were copied verbatim during exploration; check rather than sample
  for (const VertexId v : out.J)
    if (tree.node(tree_of[static_cast<size_t>(v)]).mark !=
        g.out_degree[static_cast<size_t>(v)])
      throw ModelError("copied mark mismatch");

  const std::int64_t size_target = tree.size_at(out.t_target);
  if (!out.J_star.empty()) {
    out.success = false;
    out.failure_reason = CouplingFailure::miscoupling;
  } else if (size_target !=
             static_cast<std::int64_t>(comp.vertices.size())) {
    out.success = false;
    out.failure_reason = CouplingFailure::size_mismatch;
  } else {
    out.success = true;
    out.failure_reason = CouplingFailure::none;
  }
  out.tree = std::move(tree);
  return out;
}

}  // namespace

CouplingOutcome couple_single(const LiftedRun& run, const CollapsedGraph& g,
                              VertexId i, double lambda,
                              const AttachmentKernel& kernel,
                              const OutDegreeDistribution& dist,
                              const RngStream& base, const CoupleOptions& opt) {
  if (run.family_prefix.empty() || run.family_prefix.back() != run.node_count)
    throw ModelError("coupling needs a run with family boundaries");
  if (static_cast<VertexId>(run.family_prefix.size()) - 1 != g.n)
    throw ModelError("run and graph disagree on the vertex count");
  const auto vmap = node_to_vertex(run.family_prefix);
  return couple_one(run, g, vmap, i, lambda, kernel, dist, base, nullptr, opt);
}

JointCouplingOutcome couple_joint(const LiftedRun& run,
                                  const CollapsedGraph& g,
                                  const std::vector<VertexId>& roots,
                                  double lambda,
                                  const AttachmentKernel& kernel,
                                  const OutDegreeDistribution& dist,
                                  const RngStream& base,
                                  const CoupleOptions& opt) {
  if (roots.empty()) throw ModelError("couple_joint needs at least one root");
  for (size_t k = 1; k < roots.size(); ++k) {
    if (roots[k] == roots[k - 1])
      throw ModelError("couple_joint roots must be distinct");
    if (roots[k] < roots[k - 1])
      throw ModelError("couple_joint roots must be ascending");
  }
  if (run.family_prefix.empty() || run.family_prefix.back() != run.node_count)
    throw ModelError("coupling needs a run with family boundaries");
  if (static_cast<VertexId>(run.family_prefix.size()) - 1 != g.n)
    throw ModelError("run and graph disagree on the vertex count");

  const auto vmap = node_to_vertex(run.family_prefix);
  std::vector<std::uint8_t> explored(static_cast<size_t>(g.n) + 1, 0);

  JointCouplingOutcome joint;
  for (size_t k = 0; k < roots.size(); ++k) {
    CouplingOutcome out =
        couple_one(run, g, vmap, roots[k], lambda, kernel, dist, base,
                   k == 0 ? nullptr : &explored, opt);
    for (const VertexId v : out.component)
      explored[static_cast<size_t>(v)] = 1;
    joint.outcomes.push_back(std::move(out));
  }
  for (VertexId v = 1; v <= g.n; ++v)
    if (explored[static_cast<size_t>(v)]) joint.explored.push_back(v);
  return joint;
}

SuccessRateEstimate coupling_success_rate(const AttachmentKernel& kernel,
                                          const OutDegreeDistribution& dist,
                                          VertexId n, int m,
                                          std::int64_t replicas,
                                          const RngStream& base,
                                          const CoupleOptions& opt,
                                          int threads, bool keep_rows) {
  if (replicas < 1) throw ModelError("replicas must be >= 1");
  if (m < 1) throw ModelError("m must be >= 1");
  if (static_cast<VertexId>(m) > n)
    throw ModelError("cannot draw more distinct roots than vertices");
  const double lambda = malthusian_rate(kernel).lambda;

  std::vector<CouplingReplicaRow> rows(static_cast<size_t>(replicas));
  parallel_replicas(replicas, threads, [&](std::int64_t r) {
    RngStream rep = base.child(static_cast<std::uint64_t>(r));
    RngStream s_deg = rep.child(0);
    RngStream s_run = rep.child(1);
    RngStream s_roots = rep.child(2);

    auto [dp, prefix] = sample_out_degrees(dist, n, s_deg);
    const LiftedRun run =
        grow_lifted_run(kernel, prefix.back(), prefix, s_run);
    const CollapsedGraph g = collapse_run(run, dp, prefix);

    std::vector<VertexId> roots;
    while (static_cast<int>(roots.size()) < m) {
      const VertexId cand =
          static_cast<VertexId>(s_roots.next_below(
              static_cast<std::uint64_t>(n))) + 1;
      if (std::find(roots.begin(), roots.end(), cand) == roots.end())
        roots.push_back(cand);
    }
    std::sort(roots.begin(), roots.end());

    const JointCouplingOutcome joint =
        couple_joint(run, g, roots, lambda, kernel, dist, rep.child(3), opt);

    CouplingReplicaRow& row = rows[static_cast<size_t>(r)];
    row.replica = r;
    row.roots = roots;
    row.joint_success = true;
    for (const auto& o : joint.outcomes) {
      row.success.push_back(o.success ? 1 : 0);
      row.failure.push_back(static_cast<std::int8_t>(o.failure_reason));
      row.joint_success = row.joint_success && o.success;
      row.discarded = row.discarded || o.capped;
    }
    row.s_star_first = joint.outcomes.front().s_star;
    row.t_target_first = joint.outcomes.front().t_target;
  });

  SuccessRateEstimate est;
  est.replicas = replicas;
  std::int64_t joint_ok = 0, first_ok = 0;
  for (const auto& row : rows) {
    if (row.discarded) {
      ++est.discarded;
      continue;
    }
    ++est.kept;
    if (row.joint_success) ++joint_ok;
    if (row.success.front()) ++first_ok;
  }
  est.joint = wilson_interval(joint_ok, est.kept);
  est.first_root = wilson_interval(first_ok, est.kept);
  if (keep_rows) est.rows = std::move(rows);
  return est;
}

std::vector<LawPreservationSample> law_preservation_samples(
    const AttachmentKernel& kernel, const OutDegreeDistribution& dist,
    VertexId n, std::int64_t replicas, double horizon, const RngStream& base,
    const CoupleOptions& opt, int threads) {
  if (replicas < 1) throw ModelError("replicas must be >= 1");
  const double lambda = malthusian_rate(kernel).lambda;
  const OutDegreeSampler sampler = dist.sampler();

  std::vector<LawPreservationSample> rows(static_cast<size_t>(replicas));
  CoupleOptions local = opt;
  local.tree_horizon = horizon;
  parallel_replicas(replicas, threads, [&](std::int64_t r) {
    RngStream rep = base.child(static_cast<std::uint64_t>(r));
    RngStream s_deg = rep.child(0);
    RngStream s_run = rep.child(1);
    RngStream s_root = rep.child(2);
    RngStream s_direct = rep.child(4);

    auto [dp, prefix] = sample_out_degrees(dist, n, s_deg);
    const LiftedRun run =
        grow_lifted_run(kernel, prefix.back(), prefix, s_run);
    const CollapsedGraph g = collapse_run(run, dp, prefix);
    const VertexId i =
        static_cast<VertexId>(s_root.next_below(
            static_cast<std::uint64_t>(n))) + 1;

    const CouplingOutcome out =
        couple_single(run, g, i, lambda, kernel, dist, rep.child(3), local);
    const double t_obs = std::min(out.s_star, horizon);
    MarkedTree direct =
        grow_marked_ctbp(kernel, sampler, t_obs, s_direct, local.node_cap);

    LawPreservationSample& row = rows[static_cast<size_t>(r)];
    row.t_obs = t_obs;
    row.discarded = out.capped || direct.capped();
    row.coupled_size = out.tree.size_at(t_obs);
    row.coupled_root_children = out.tree.root_children_at(t_obs);
    row.direct_size = direct.size_at(t_obs);
    row.direct_root_children = direct.root_children_at(t_obs);
  });
  return rows;
}

}  // namespace cbp
