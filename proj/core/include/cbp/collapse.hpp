#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "cbp/engine.hpp"

namespace cbp {

// Out-degree law on {1, 2, ...}, tabulated (possibly from a truncated
// zeta-like family; the truncation point is recorded and reported).
class OutDegreeDistribution {
 public:
  static OutDegreeDistribution degenerate(std::int32_t d);
  // pmf[k] = h(k+1); must sum to 1 within 1e-12
  static OutDegreeDistribution from_pmf(std::vector<double> pmf);
  // h(d) proportional to d^-gamma on 1..truncation, renormalized
  static OutDegreeDistribution zeta(double gamma, std::int64_t truncation);

  double pmf(std::int64_t d) const;
  double mean() const { return mean_; }
  std::int32_t max_support() const {
    return static_cast<std::int32_t>(pmf_->size());
  }
  double zeta_gamma() const { return gamma_; }
  std::int64_t zeta_truncation() const { return truncation_; }

  std::int32_t sample(RngStream& rng) const;
  OutDegreeSampler sampler() const;  // shares the tables; cheap to copy

 private:
  OutDegreeDistribution() = default;

  std::shared_ptr<const std::vector<double>> pmf_;
  std::shared_ptr<const std::vector<double>> cdf_;
  double mean_ = 0.0;
  double gamma_ = 0.0;
  std::int64_t truncation_ = 0;
};

// i.i.d. draws D_1..D_n plus prefix sums S_0..S_n
std::pair<std::vector<std::int32_t>, std::vector<NodeId>> sample_out_degrees(
    const OutDegreeDistribution& dist, VertexId n, RngStream& rng);

// node id -> family vertex, from the prefix sums (index 0 unused)
std::vector<VertexId> node_to_vertex(const std::vector<NodeId>& prefix);

struct EdgeRec {
  VertexId src = 0;
  VertexId dst = 0;
  std::int64_t mult = 0;
};

// Directed multigraph on vertices 1..n produced by merging families.
// Every vertex's out-multiplicity equals its out-degree mark; under the
// root-loop convention vertex 1 carries one conventional self-loop standing
// in for the parentless root node.
struct CollapsedGraph {
  VertexId n = 0;
  std::vector<std::int32_t> out_degree;  // D+, [1..n]
  std::vector<EdgeRec> edges;            // sorted by (src, dst); loops included
  std::vector<std::int32_t> self_loops;  // l(i)
  std::vector<std::int64_t> in_mult;     // in-multiplicity (loops count once)
  bool root_loop_convention = true;

  // CSR views over the multiplicity records
  std::vector<std::int64_t> fwd_off;
  std::vector<std::pair<VertexId, std::int64_t>> fwd;  // (dst, mult)
  std::vector<std::int64_t> rev_off;
  std::vector<std::pair<VertexId, std::int64_t>> rev;  // (src, mult)

  std::int64_t total_multiplicity() const;
};

CollapsedGraph collapse_run(const LiftedRun& run,
                            const std::vector<std::int32_t>& dplus,
                            const std::vector<NodeId>& prefix,
                            bool root_loop_convention = true);

// graph assembled from explicit parts (tests, synthetic fixtures)
CollapsedGraph make_graph(VertexId n, std::vector<std::int32_t> dplus,
                          std::vector<EdgeRec> edges,
                          bool root_loop_convention = true);

// In-component of vertex i: all vertices with a directed path to i,
// reported in increasing label (age) order, together with every edge of the
// graph whose destination lies in the component, and the members' marks.
struct InComponent {
  VertexId root = 0;
  std::vector<VertexId> vertices;  // ascending; vertices.front() == root
  std::vector<std::int32_t> marks;
  std::vector<EdgeRec> edges;  // sorted by (src, dst)
  bool truncated = false;      // stopped early at max_vertices
};

// max_vertices == 0 explores exhaustively; otherwise exploration stops once
// the component exceeds that many vertices and marks the result truncated
// (edges and marks are then left incomplete).
InComponent in_component(const CollapsedGraph& g, VertexId i,
                         std::int64_t max_vertices = 0);

// Direct one-vertex-at-a-time construction for linear kernels
// f(k) = c k + beta: vertex l arrives with its marked number of edges and
// attaches each proportionally to c deg + beta D+ (the conventional loop at
// vertex 1 contributes no attachment weight).
CollapsedGraph sequential_linear_graph(double c, double beta,
                                       const std::vector<std::int32_t>& dplus,
                                       RngStream& rng);

struct EquivalenceReport {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 0.0;
  std::int64_t classes = 0;
  std::int64_t replicas = 0;
};

// Simulates n-vertex graphs both through the collapse pipeline and through
// the sequential rule and compares the two empirical distributions over
// labeled graph classes (a refinement of isomorphism classes).
EquivalenceReport sequential_linear_equivalence_check(
    double c, double beta, const OutDegreeDistribution& dist, VertexId n,
    std::int64_t replicas, RngStream rng);

}  // namespace cbp
