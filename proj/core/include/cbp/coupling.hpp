#pragma once

#include <cstdint>
#include <vector>

#include "cbp/analytics.hpp"
#include "cbp/collapse.hpp"
#include "cbp/engine.hpp"

namespace cbp {

enum class CouplingFailure { none, miscoupling, size_mismatch };

struct CoupleOptions {
  // materialize the coupled tree at least up to this time (the construction
  // always covers t_target; the window beyond min(s_star, horizon) is never
  // generated)
  double tree_horizon = 0.0;
  std::int64_t node_cap = std::int64_t{1} << 20;
};

// Result of coupling one vertex's in-component with a tree evolving by the
// limit law: the copied vertex sets, the internal clock, and the success
// event (component isomorphic, marks included, to the tree at t_target).
struct CouplingOutcome {
  VertexId root = 0;
  double t_target = 0.0;  // log(n / root) / lambda
  MarkedTree tree = MarkedTree::single_root(1);
  std::vector<VertexId> J;       // successfully copied vertices
  std::vector<VertexId> J_star;  // miscoupled vertices
  std::int64_t dummy_count = 0;
  double s_star = 0.0;  // internal clock when the construction ends
  bool success = false;
  CouplingFailure failure_reason = CouplingFailure::none;

  std::vector<VertexId> component;  // explored in-component, ascending
  double tree_valid_until = 0.0;
  bool capped = false;
};

CouplingOutcome couple_single(const LiftedRun& run, const CollapsedGraph& g,
                              VertexId i, double lambda,
                              const AttachmentKernel& kernel,
                              const OutDegreeDistribution& dist,
                              const RngStream& base,
                              const CoupleOptions& opt = {});

struct JointCouplingOutcome {
  std::vector<CouplingOutcome> outcomes;  // one per root, ascending roots
  std::vector<VertexId> explored;         // union of components, ascending

  bool all_success() const {
    for (const auto& o : outcomes)
      if (!o.success) return false;
    return true;
  }
};

// Sequential construction over ascending distinct roots; a later root's
// vertex also miscouples when it touches any vertex explored by an earlier
// root. Regrowth streams are keyed by vertex (or node) id alone, so the
// independent copies reused across constructions agree, and the first
// root's outcome is bit-identical to couple_single.
JointCouplingOutcome couple_joint(const LiftedRun& run,
                                  const CollapsedGraph& g,
                                  const std::vector<VertexId>& roots,
                                  double lambda,
                                  const AttachmentKernel& kernel,
                                  const OutDegreeDistribution& dist,
                                  const RngStream& base,
                                  const CoupleOptions& opt = {});

struct CouplingReplicaRow {
  std::int64_t replica = 0;
  std::vector<VertexId> roots;
  std::vector<std::uint8_t> success;  // per root
  std::vector<std::int8_t> failure;   // per root, CouplingFailure as int
  bool joint_success = false;
  bool discarded = false;  // a capped tree made the replica unusable
  double s_star_first = 0.0;
  double t_target_first = 0.0;
};

struct SuccessRateEstimate {
  std::int64_t replicas = 0;
  std::int64_t kept = 0;
  std::int64_t discarded = 0;
  WilsonInterval joint;       // all-roots success over kept replicas
  WilsonInterval first_root;  // marginal of the smallest root
  std::vector<CouplingReplicaRow> rows;  // filled when keep_rows
};

// Builds `replicas` fresh graphs of n vertices, draws m distinct uniform
// roots each, runs the joint coupling and estimates the all-roots success
// probability with a Wilson interval. Per-replica streams derive from
// (base, replica), so the estimate is independent of the thread count.
SuccessRateEstimate coupling_success_rate(const AttachmentKernel& kernel,
                                          const OutDegreeDistribution& dist,
                                          VertexId n, int m,
                                          std::int64_t replicas,
                                          const RngStream& base,
                                          const CoupleOptions& opt = {},
                                          int threads = 1,
                                          bool keep_rows = false);

struct LawPreservationSample {
  std::int64_t coupled_size = 0;
  std::int64_t coupled_root_children = 0;
  std::int64_t direct_size = 0;
  std::int64_t direct_root_children = 0;
  double t_obs = 0.0;
  bool discarded = false;
};

// Per replica: couple a uniform vertex, observe (size, root child count) of
// the coupled tree at t_obs = min(s_star, horizon), and grow an independent
// direct tree to the same t_obs for comparison.
std::vector<LawPreservationSample> law_preservation_samples(
    const AttachmentKernel& kernel, const OutDegreeDistribution& dist,
    VertexId n, std::int64_t replicas, double horizon, const RngStream& base,
    const CoupleOptions& opt = {}, int threads = 1);

}  // namespace cbp
