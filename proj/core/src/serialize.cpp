#include "cbp/serialize.hpp"

#include <cstdio>

#include <json.hpp>

namespace cbp {

using nlohmann::json;

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string lifted_run_to_json(const LiftedRun& run) {
  json j;
  j["node_count"] = run.node_count;
  j["seed"] = run.rng_seed;
  j["family_prefix"] = run.family_prefix;
  json nodes = json::array();
  for (NodeId v = 1; v <= run.node_count; ++v) {
    nodes.push_back({{"index", v},
                     {"parent", run.parent[static_cast<size_t>(v)]},
                     {"sigma", run.sigma[static_cast<size_t>(v)]}});
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

std::string marked_tree_to_json(const MarkedTree& tree) {
  const auto children = tree.children_by_birth();
  std::vector<std::string> addr(static_cast<size_t>(tree.size()) + 1);
  addr[1] = "";
  // children always follow parents in id order only for engine-grown trees,
  // so walk the structure instead
  std::vector<NodeId> stack{1};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    const auto& ch = children[static_cast<size_t>(v)];
    for (size_t k = 0; k < ch.size(); ++k) {
      const NodeId c = ch[k];
      addr[static_cast<size_t>(c)] =
          addr[static_cast<size_t>(v)].empty()
              ? std::to_string(k + 1)
              : addr[static_cast<size_t>(v)] + "." + std::to_string(k + 1);
      stack.push_back(c);
    }
  }
  json j;
  j["capped"] = tree.capped();
  json nodes = json::array();
  for (NodeId v = 1; v <= tree.size(); ++v) {
    nodes.push_back({{"address", addr[static_cast<size_t>(v)]},
                     {"mark", tree.node(v).mark},
                     {"birth_time", tree.node(v).birth_time}});
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

std::string graph_to_json(const CollapsedGraph& g) {
  json j;
  j["n"] = g.n;
  j["root_loop_convention"] = g.root_loop_convention;
  json verts = json::array();
  for (VertexId v = 1; v <= g.n; ++v)
    verts.push_back(
        {{"id", v}, {"out_degree", g.out_degree[static_cast<size_t>(v)]}});
  j["vertices"] = std::move(verts);
  json edges = json::array();
  for (const auto& e : g.edges)
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"mult", e.mult}});
  j["edges"] = std::move(edges);
  return j.dump();
}

CollapsedGraph graph_from_json(const std::string& text) {
  const json j = json::parse(text);
  const VertexId n = j.at("n").get<VertexId>();
  std::vector<std::int32_t> dplus(static_cast<size_t>(n) + 1, 0);
  for (const auto& v : j.at("vertices"))
    dplus.at(v.at("id").get<size_t>()) = v.at("out_degree").get<std::int32_t>();
  std::vector<EdgeRec> edges;
  for (const auto& e : j.at("edges"))
    edges.push_back(EdgeRec{e.at("src").get<VertexId>(),
                            e.at("dst").get<VertexId>(),
                            e.at("mult").get<std::int64_t>()});
  const bool conv = j.value("root_loop_convention", true);
  return make_graph(n, std::move(dplus), std::move(edges), conv);
}

std::string graph_to_dot(const CollapsedGraph& g) {
  if (g.n > 200) throw ModelError("dot export limited to n <= 200");
  std::string out = "digraph cbp {\n";
  for (VertexId v = 1; v <= g.n; ++v)
    out += "  " + std::to_string(v) + " [label=\"" + std::to_string(v) +
           " (d+=" + std::to_string(g.out_degree[static_cast<size_t>(v)]) +
           ")\"];\n";
  for (const auto& e : g.edges) {
    out += "  " + std::to_string(e.src) + " -> " + std::to_string(e.dst);
    if (e.mult > 1) out += " [label=\"x" + std::to_string(e.mult) + "\"]";
    out += ";\n";
  }
  out += "}\n";
  return out;
}

const char* coupling_failure_name(CouplingFailure f) {
  switch (f) {
    case CouplingFailure::none:
      return "none";
    case CouplingFailure::miscoupling:
      return "miscoupling";
    case CouplingFailure::size_mismatch:
      return "size_mismatch";
  }
  return "unknown";
}

std::string coupling_outcome_to_json(const CouplingOutcome& out) {
  json j;
  j["root"] = out.root;
  j["success"] = out.success;
  j["failure_reason"] = coupling_failure_name(out.failure_reason);
  j["J_size"] = out.J.size();
  j["J_star_size"] = out.J_star.size();
  j["dummy_count"] = out.dummy_count;
  j["s_star"] = out.s_star;
  j["t_target"] = out.t_target;
  j["component_size"] = out.component.size();
  j["capped"] = out.capped;
  j["tree"] = json::parse(marked_tree_to_json(out.tree));
  return j.dump();
}

}  // namespace cbp
