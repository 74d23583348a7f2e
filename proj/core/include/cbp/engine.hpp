#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cbp/kernel.hpp"
#include "cbp/rng.hpp"

namespace cbp {

// Node and vertex ids are 1-based throughout; index 0 of per-id vectors is
// an unused sentinel. This matches the age ordering used everywhere (older
// means smaller id).
using NodeId = std::int64_t;
using VertexId = std::int64_t;

// Fenwick-backed weighted sampling: O(log n) weight update and
// proportional draw over ids 1..capacity. Ties resolve to the lowest id.
class WeightedIndex {
 public:
  explicit WeightedIndex(std::int64_t capacity);

  void set(std::int64_t i, double w);
  double weight(std::int64_t i) const { return weight_[i]; }
  double total() const { return total_; }
  std::int64_t capacity() const { return cap_; }

  // draw proportional to weights; u uniform on (0,1]
  std::int64_t sample(double u) const;

 private:
  double prefix(std::int64_t i) const;

  std::int64_t cap_;
  std::vector<double> tree_;    // fenwick, 1-based
  std::vector<double> weight_;
  double total_ = 0.0;
};

// Realization of the base branching process run until S_n births: birth
// times, parent links, in-degrees and the family boundaries S_0..S_n.
struct LiftedRun {
  AttachmentKernel kernel = AttachmentKernel::constant(1.0);
  NodeId node_count = 0;
  std::vector<double> sigma;         // birth times, sigma[1] = 0
  std::vector<NodeId> parent;        // parent[1] = 0
  std::vector<std::int32_t> in_degree;
  std::vector<NodeId> family_prefix;  // S_0..S_n
  std::uint64_t rng_seed = 0;         // caller-supplied label, not consumed

  VertexId family_count() const {
    return static_cast<VertexId>(family_prefix.size()) - 1;
  }
};

// Pure birth process with rates f(k+1) out of state k, started at 0.
// Returns the event times <= t_max, at most max_events of them.
std::vector<double> simulate_pure_birth(const AttachmentKernel& kernel,
                                        double t_max, std::int64_t max_events,
                                        RngStream& rng);

// Grows the base process to total_nodes births: node 1 at time 0; node v
// attaches to u < v proportionally to f(in_degree(u)+1), with the holding
// time before v exponential in the total weight. family_prefix (S_0..S_n,
// possibly empty) is validated against total_nodes and stored.
LiftedRun grow_lifted_run(const AttachmentKernel& kernel, NodeId total_nodes,
                          std::vector<NodeId> family_prefix, RngStream rng);

// Rooted tree with integer marks and birth times. A node of mark d carries
// d reproduction slots; slot in state s births the node's next child at
// rate f(s+1). Node ids are assigned in insertion order (which equals birth
// order for engine-grown trees, but not for externally assembled ones).
class MarkedTree {
 public:
  struct Node {
    NodeId parent = 0;            // 0 for the root
    std::int32_t parent_slot = 0; // 1..mark(parent); 0 for the root
    std::int32_t mark = 0;
    double birth_time = 0.0;
  };

  static MarkedTree single_root(std::int32_t mark, double birth_time = 0.0);

  NodeId add_child(NodeId parent, std::int32_t parent_slot, std::int32_t mark,
                   double birth_time);

  NodeId size() const { return static_cast<NodeId>(nodes_.size()) - 1; }
  NodeId size_at(double t) const;
  const Node& node(NodeId v) const { return nodes_[static_cast<size_t>(v)]; }
  std::int64_t root_children_at(double t) const;
  std::int64_t children_count(NodeId v) const;
  std::int64_t slot_state(NodeId v, std::int32_t slot) const;
  std::int64_t mark_sum() const { return mark_sum_; }

  bool capped() const { return capped_; }
  void set_capped() { capped_ = true; }

  // splice `sub` under node `at`: sub's root is identified with `at`
  // (marks must agree and at must be childless); all other sub nodes are
  // copied with birth times shifted by time_offset
  void graft(NodeId at, const MarkedTree& sub, double time_offset);

  // children of each node ordered by (birth time, id)
  std::vector<std::vector<NodeId>> children_by_birth() const;

  // Ulam-Harris address of v as child indices from the root, e.g. {2,1}
  std::vector<std::int64_t> address_of(NodeId v) const;

 private:
  friend void evolve_marked_tree(MarkedTree&, const AttachmentKernel&,
                                 const std::function<std::int32_t(RngStream&)>&,
                                 double, double, RngStream&, std::int64_t);

  std::vector<Node> nodes_{Node{}};        // [0] sentinel
  std::vector<std::int64_t> slot0_{0};     // node -> first flat slot index
  std::vector<NodeId> slot_node_;          // flat slot -> node
  std::vector<std::int64_t> slot_state_;   // births so far, per flat slot
  std::int64_t mark_sum_ = 0;
  bool capped_ = false;
};

using OutDegreeSampler = std::function<std::int32_t(RngStream&)>;

// Continues an existing tree from t_from to t_to under the slot dynamics,
// drawing fresh marks for newborn nodes. Exact: per-slot next-event times
// compete in a priority queue; a slot is rescheduled only when it fires.
// Stops early (and flags the tree capped) when size() would exceed
// node_cap.
void evolve_marked_tree(MarkedTree& tree, const AttachmentKernel& kernel,
                        const OutDegreeSampler& outdeg, double t_from,
                        double t_to, RngStream& rng, std::int64_t node_cap);

// Fresh marked tree grown from a single root (mark drawn from outdeg, or
// forced to root_mark when root_mark >= 1) up to the given horizon.
MarkedTree grow_marked_ctbp(const AttachmentKernel& kernel,
                            const OutDegreeSampler& outdeg, double horizon,
                            RngStream& rng, std::int64_t node_cap,
                            std::int32_t root_mark = 0);

}  // namespace cbp
