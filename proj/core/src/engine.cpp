#include "cbp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace cbp {

WeightedIndex::WeightedIndex(std::int64_t capacity)
    : cap_(capacity),
      tree_(static_cast<size_t>(capacity) + 1, 0.0),
      weight_(static_cast<size_t>(capacity) + 1, 0.0) {
  if (capacity < 1) throw ModelError("WeightedIndex capacity must be >= 1");
}

void WeightedIndex::set(std::int64_t i, double w) {
  if (i < 1 || i > cap_) throw ModelError("WeightedIndex index out of range");
  const double delta = w - weight_[static_cast<size_t>(i)];
  weight_[static_cast<size_t>(i)] = w;
  total_ += delta;
  for (std::int64_t j = i; j <= cap_; j += j & (-j))
    tree_[static_cast<size_t>(j)] += delta;
}

double WeightedIndex::prefix(std::int64_t i) const {
  double s = 0.0;
  for (std::int64_t j = i; j > 0; j -= j & (-j))
    s += tree_[static_cast<size_t>(j)];
  return s;
}

std::int64_t WeightedIndex::sample(double u) const {
  double r = u * total_;
  std::int64_t idx = 0;
  std::int64_t step = std::int64_t{1}
                      << (63 - __builtin_clzll(static_cast<std::uint64_t>(cap_)));
  for (; step > 0; step >>= 1) {
    const std::int64_t nxt = idx + step;
    if (nxt <= cap_ && tree_[static_cast<size_t>(nxt)] < r) {
      idx = nxt;
      r -= tree_[static_cast<size_t>(nxt)];
    }
  }
  std::int64_t got = idx + 1;
  if (got > cap_) got = cap_;
  // fp drift can land on a zero-weight id; move to the nearest positive one
  if (weight_[static_cast<size_t>(got)] <= 0.0) {
    std::int64_t lo = got - 1, hi = got + 1;
    for (;;) {
      if (lo >= 1 && weight_[static_cast<size_t>(lo)] > 0.0) return lo;
      if (hi <= cap_ && weight_[static_cast<size_t>(hi)] > 0.0) return hi;
      --lo;
      ++hi;
      if (lo < 1 && hi > cap_)
        throw ModelError("WeightedIndex::sample on empty index");
    }
  }
  return got;
}

std::vector<double> simulate_pure_birth(const AttachmentKernel& kernel,
                                        double t_max, std::int64_t max_events,
                                        RngStream& rng) {
  if (!(t_max >= 0.0) || !std::isfinite(t_max))
    throw ModelError("simulate_pure_birth requires a finite horizon");
  std::vector<double> events;
  double t = 0.0;
  for (std::int64_t n = 1; n <= max_events; ++n) {
    t += rng.next_exponential(kernel(n));
    if (t > t_max) break;
    events.push_back(t);
  }
  return events;
}

LiftedRun grow_lifted_run(const AttachmentKernel& kernel, NodeId total_nodes,
                          std::vector<NodeId> family_prefix, RngStream rng) {
  if (total_nodes < 1)
    throw ModelError("grow_lifted_run requires total_nodes >= 1");
  if (!family_prefix.empty()) {
    if (family_prefix.front() != 0)
      throw ModelError("family_prefix must start at S_0 = 0");
    for (size_t i = 1; i < family_prefix.size(); ++i)
      if (family_prefix[i] <= family_prefix[i - 1])
        throw ModelError("family_prefix must be strictly increasing");
    if (family_prefix.back() != total_nodes)
      throw ModelError("family_prefix must end at total_nodes");
  }

  LiftedRun run;
  run.kernel = kernel;
  run.node_count = total_nodes;
  run.family_prefix = std::move(family_prefix);
  run.sigma.assign(static_cast<size_t>(total_nodes) + 1, 0.0);
  run.parent.assign(static_cast<size_t>(total_nodes) + 1, 0);
  run.in_degree.assign(static_cast<size_t>(total_nodes) + 1, 0);

  WeightedIndex wi(total_nodes);
  wi.set(1, kernel(1));
  for (NodeId v = 2; v <= total_nodes; ++v) {
    // holding time first, then the parent draw (documented stream order)
    run.sigma[static_cast<size_t>(v)] =
        run.sigma[static_cast<size_t>(v - 1)] +
        rng.next_exponential(wi.total());
    const NodeId p = wi.sample(rng.next_unit());
    run.parent[static_cast<size_t>(v)] = p;
    const std::int32_t d = ++run.in_degree[static_cast<size_t>(p)];
    wi.set(p, kernel(d + 1));
    wi.set(v, kernel(1));
  }
  return run;
}

MarkedTree MarkedTree::single_root(std::int32_t mark, double birth_time) {
  if (mark < 1) throw ModelError("marks must be positive integers");
  MarkedTree t;
  t.nodes_.push_back(Node{0, 0, mark, birth_time});
  t.slot0_.push_back(0);
  t.slot0_.push_back(mark);
  t.slot_node_.assign(static_cast<size_t>(mark), 1);
  t.slot_state_.assign(static_cast<size_t>(mark), 0);
  t.mark_sum_ = mark;
  return t;
}

NodeId MarkedTree::add_child(NodeId parent, std::int32_t parent_slot,
                             std::int32_t mark, double birth_time) {
  if (parent < 1 || parent > size()) throw ModelError("bad parent id");
  if (mark < 1) throw ModelError("marks must be positive integers");
  const Node& pn = nodes_[static_cast<size_t>(parent)];
  if (parent_slot < 1 || parent_slot > pn.mark)
    throw ModelError("parent slot out of range");
  nodes_.push_back(Node{parent, parent_slot, mark, birth_time});
  const NodeId id = size();
  ++slot_state_[static_cast<size_t>(slot0_[static_cast<size_t>(parent)] +
                                    parent_slot - 1)];
  slot0_.push_back(slot0_.back() + mark);
  slot_node_.insert(slot_node_.end(), static_cast<size_t>(mark), id);
  slot_state_.insert(slot_state_.end(), static_cast<size_t>(mark), 0);
  mark_sum_ += mark;
  return id;
}

NodeId MarkedTree::size_at(double t) const {
  NodeId c = 0;
  for (size_t v = 1; v < nodes_.size(); ++v)
    if (nodes_[v].birth_time <= t) ++c;
  return c;
}

std::int64_t MarkedTree::root_children_at(double t) const {
  std::int64_t c = 0;
  for (size_t v = 2; v < nodes_.size(); ++v)
    if (nodes_[v].parent == 1 && nodes_[v].birth_time <= t) ++c;
  return c;
}

std::int64_t MarkedTree::children_count(NodeId v) const {
  std::int64_t c = 0;
  for (size_t u = 2; u < nodes_.size(); ++u)
    if (nodes_[u].parent == v) ++c;
  return c;
}

std::int64_t MarkedTree::slot_state(NodeId v, std::int32_t slot) const {
  if (v < 1 || v > size()) throw ModelError("bad node id");
  if (slot < 1 || slot > nodes_[static_cast<size_t>(v)].mark)
    throw ModelError("slot out of range");
  return slot_state_[static_cast<size_t>(slot0_[static_cast<size_t>(v)] +
                                         slot - 1)];
}

void MarkedTree::graft(NodeId at, const MarkedTree& sub, double time_offset) {
  if (at < 1 || at > size()) throw ModelError("graft target out of range");
  if (sub.node(1).mark != nodes_[static_cast<size_t>(at)].mark)
    throw ModelError("graft root mark mismatch");
  if (children_count(at) != 0)
    throw ModelError("graft target must be childless");
  std::vector<NodeId> map(static_cast<size_t>(sub.size()) + 1, 0);
  map[1] = at;
  for (NodeId v = 2; v <= sub.size(); ++v) {
    const Node& n = sub.node(v);
    map[static_cast<size_t>(v)] =
        add_child(map[static_cast<size_t>(n.parent)], n.parent_slot, n.mark,
                  n.birth_time + time_offset);
  }
  if (sub.capped()) capped_ = true;
}

std::vector<std::vector<NodeId>> MarkedTree::children_by_birth() const {
  std::vector<std::vector<NodeId>> ch(nodes_.size());
  for (NodeId v = 2; v <= size(); ++v)
    ch[static_cast<size_t>(nodes_[static_cast<size_t>(v)].parent)].push_back(v);
  for (auto& c : ch)
    std::sort(c.begin(), c.end(), [&](NodeId a, NodeId b) {
      const double ta = nodes_[static_cast<size_t>(a)].birth_time;
      const double tb = nodes_[static_cast<size_t>(b)].birth_time;
      return ta != tb ? ta < tb : a < b;
    });
  return ch;
}

std::vector<std::int64_t> MarkedTree::address_of(NodeId v) const {
  const auto ch = children_by_birth();
  std::vector<std::int64_t> addr;
  while (v != 1) {
    const NodeId p = nodes_[static_cast<size_t>(v)].parent;
    const auto& sib = ch[static_cast<size_t>(p)];
    const auto it = std::find(sib.begin(), sib.end(), v);
    addr.push_back(static_cast<std::int64_t>(it - sib.begin()) + 1);
    v = p;
  }
  std::reverse(addr.begin(), addr.end());
  return addr;
}

void evolve_marked_tree(MarkedTree& tree, const AttachmentKernel& kernel,
                        const OutDegreeSampler& outdeg, double t_from,
                        double t_to, RngStream& rng, std::int64_t node_cap) {
  if (tree.capped()) return;
  if (!(t_to >= t_from)) return;

  using Ev = std::pair<double, std::int64_t>;  // (event time, flat slot)
  std::priority_queue<Ev, std::vector<Ev>, std::greater<Ev>> pq;

  const auto schedule = [&](std::int64_t gslot, double now) {
    const std::int64_t s = tree.slot_state_[static_cast<size_t>(gslot)];
    pq.emplace(now + rng.next_exponential(kernel(s + 1)), gslot);
  };

  // memorylessness: every live slot restarts its clock at t_from; a slot
  // whose node is only born later cannot fire before that birth
  for (std::int64_t g = 0;
       g < static_cast<std::int64_t>(tree.slot_state_.size()); ++g) {
    const NodeId owner = tree.slot_node_[static_cast<size_t>(g)];
    schedule(g, std::max(t_from, tree.node(owner).birth_time));
  }

  while (!pq.empty()) {
    const auto [t, gslot] = pq.top();
    if (t > t_to) break;
    pq.pop();
    if (tree.size() >= node_cap) {
      tree.set_capped();
      return;
    }
    const NodeId parent = tree.slot_node_[static_cast<size_t>(gslot)];
    const std::int32_t local_slot = static_cast<std::int32_t>(
        gslot - tree.slot0_[static_cast<size_t>(parent)] + 1);
    const std::int32_t mark = outdeg(rng);
    const NodeId child = tree.add_child(parent, local_slot, mark, t);
    for (std::int32_t s = 0; s < mark; ++s)
      schedule(tree.slot0_[static_cast<size_t>(child)] + s, t);
    schedule(gslot, t);  // firing slot advanced; resample with its new rate
  }
}

MarkedTree grow_marked_ctbp(const AttachmentKernel& kernel,
                            const OutDegreeSampler& outdeg, double horizon,
                            RngStream& rng, std::int64_t node_cap,
                            std::int32_t root_mark) {
  if (!(horizon >= 0.0)) throw ModelError("horizon must be >= 0");
  const std::int32_t mark = root_mark >= 1 ? root_mark : outdeg(rng);
  MarkedTree tree = MarkedTree::single_root(mark, 0.0);
  evolve_marked_tree(tree, kernel, outdeg, 0.0, horizon, rng, node_cap);
  return tree;
}

}  // namespace cbp
