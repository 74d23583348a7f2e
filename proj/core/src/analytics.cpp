#include "cbp/analytics.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace cbp {

// ---------------------------------------------------------------------------
// PageRank
// ---------------------------------------------------------------------------

PageRankVector graph_pagerank(const CollapsedGraph& g, double damping,
                              double tol, std::int64_t max_iter) {
  if (!(damping > 0.0 && damping < 1.0))
    throw ModelError("damping must lie in (0,1)");
  const VertexId n = g.n;
  const double nn = static_cast<double>(n);

  std::vector<double> row_sum(static_cast<size_t>(n) + 1, 0.0);
  for (VertexId u = 1; u <= n; ++u)
    for (std::int64_t e = g.fwd_off[static_cast<size_t>(u)];
         e < g.fwd_off[static_cast<size_t>(u) + 1]; ++e)
      row_sum[static_cast<size_t>(u)] +=
          static_cast<double>(g.fwd[static_cast<size_t>(e)].second);

  std::vector<double> x(static_cast<size_t>(n) + 1, 1.0 / nn);
  std::vector<double> y(static_cast<size_t>(n) + 1, 0.0);
  x[0] = y[0] = 0.0;

  PageRankVector out;
  out.damping = damping;
  for (std::int64_t it = 1; it <= max_iter; ++it) {
    double dangling = 0.0;
    for (VertexId u = 1; u <= n; ++u)
      if (row_sum[static_cast<size_t>(u)] == 0.0)
        dangling += x[static_cast<size_t>(u)];
    const double base = (1.0 - damping) / nn + damping * dangling / nn;
    std::fill(y.begin() + 1, y.end(), base);
    for (VertexId u = 1; u <= n; ++u) {
      const double rs = row_sum[static_cast<size_t>(u)];
      if (rs == 0.0) continue;
      const double share = damping * x[static_cast<size_t>(u)] / rs;
      for (std::int64_t e = g.fwd_off[static_cast<size_t>(u)];
           e < g.fwd_off[static_cast<size_t>(u) + 1]; ++e) {
        const auto& [dst, mult] = g.fwd[static_cast<size_t>(e)];
        y[static_cast<size_t>(dst)] += share * static_cast<double>(mult);
      }
    }
    double diff = 0.0;
    for (VertexId v = 1; v <= n; ++v)
      diff += std::abs(y[static_cast<size_t>(v)] - x[static_cast<size_t>(v)]);
    x.swap(y);
    out.iterations = it;
    out.residual = diff;
    if (diff <= tol) {
      out.r.assign(static_cast<size_t>(n) + 1, 0.0);
      for (VertexId v = 1; v <= n; ++v)
        out.r[static_cast<size_t>(v)] = nn * x[static_cast<size_t>(v)];
      return out;
    }
  }
  std::ostringstream os;
  os << "pagerank did not converge in " << max_iter
     << " sweeps (residual " << out.residual << ")";
  throw ModelError(os.str());
}

// ---------------------------------------------------------------------------
// Local rooted multigraphs and canonical codes
// ---------------------------------------------------------------------------

LocalGraph local_from_component(const InComponent& comp) {
  if (comp.truncated)
    throw ModelError("cannot build a local graph from a truncated component");
  LocalGraph lg;
  const auto idx_of = [&](VertexId v) {
    const auto it =
        std::lower_bound(comp.vertices.begin(), comp.vertices.end(), v);
    return static_cast<std::int32_t>(it - comp.vertices.begin());
  };
  lg.root = idx_of(comp.root);
  lg.marks.assign(comp.marks.begin(), comp.marks.end());
  lg.loops.assign(comp.vertices.size(), 0);
  for (const auto& e : comp.edges) {
    if (e.src == e.dst)
      lg.loops[static_cast<size_t>(idx_of(e.src))] +=
          static_cast<std::int32_t>(e.mult);
    else
      lg.edges.push_back({idx_of(e.src), idx_of(e.dst), e.mult});
  }
  return lg;
}

LocalGraph local_from_tree(const MarkedTree& tree, double t) {
  LocalGraph lg;
  std::vector<std::int32_t> idx(static_cast<size_t>(tree.size()) + 1, -1);
  for (NodeId v = 1; v <= tree.size(); ++v) {
    if (tree.node(v).birth_time <= t) {
      idx[static_cast<size_t>(v)] = static_cast<std::int32_t>(lg.marks.size());
      lg.marks.push_back(tree.node(v).mark);
    }
  }
  if (lg.marks.empty()) throw ModelError("tree empty at the requested time");
  lg.loops.assign(lg.marks.size(), 0);
  lg.root = idx[1];
  for (NodeId v = 2; v <= tree.size(); ++v) {
    if (idx[static_cast<size_t>(v)] < 0) continue;
    const NodeId p = tree.node(v).parent;
    if (idx[static_cast<size_t>(p)] < 0)
      throw ModelError("child born before its parent");
    lg.edges.push_back(
        {idx[static_cast<size_t>(v)], idx[static_cast<size_t>(p)], 1});
  }
  return lg;
}

LocalGraph local_tree_target(const std::vector<std::int32_t>& parents,
                             const std::vector<std::int32_t>& marks) {
  if (parents.size() != marks.size() || marks.empty())
    throw ModelError("target arrays must be nonempty and equally sized");
  LocalGraph lg;
  lg.root = 0;
  lg.marks = marks;
  lg.loops.assign(marks.size(), 0);
  for (std::int32_t v = 1; v < static_cast<std::int32_t>(parents.size()); ++v) {
    if (parents[static_cast<size_t>(v)] < 0 ||
        parents[static_cast<size_t>(v)] >= v)
      throw ModelError("target parents must precede their children");
    lg.edges.push_back({v, parents[static_cast<size_t>(v)], 1});
  }
  return lg;
}

namespace {

struct Adjacency {
  std::vector<std::vector<std::pair<std::int32_t, std::int64_t>>> out, in;
  std::vector<std::int32_t> dist;  // hops to the root along directed edges
};

Adjacency build_adjacency(const LocalGraph& g) {
  const std::int32_t n = g.size();
  Adjacency a;
  a.out.resize(static_cast<size_t>(n));
  a.in.resize(static_cast<size_t>(n));
  for (const auto& e : g.edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n || e.src == e.dst ||
        e.mult < 1)
      throw ModelError("bad local edge");
    a.out[static_cast<size_t>(e.src)].emplace_back(e.dst, e.mult);
    a.in[static_cast<size_t>(e.dst)].emplace_back(e.src, e.mult);
  }
  a.dist.assign(static_cast<size_t>(n), n + 1);
  std::vector<std::int32_t> bfs{g.root};
  a.dist[static_cast<size_t>(g.root)] = 0;
  for (size_t h = 0; h < bfs.size(); ++h) {
    const std::int32_t v = bfs[h];
    for (const auto& [u, m] : a.in[static_cast<size_t>(v)]) {
      if (a.dist[static_cast<size_t>(u)] > a.dist[static_cast<size_t>(v)] + 1) {
        a.dist[static_cast<size_t>(u)] = a.dist[static_cast<size_t>(v)] + 1;
        bfs.push_back(u);
      }
    }
  }
  return a;
}

// self-loops are vertex attributes here; tree shape concerns the non-loop
// edges only
bool is_tree_shaped(const LocalGraph& g) {
  const std::int32_t n = g.size();
  if (static_cast<std::int64_t>(g.edges.size()) != n - 1) return false;
  std::vector<std::int32_t> out_cnt(static_cast<size_t>(n), 0);
  for (const auto& e : g.edges) {
    if (e.mult != 1) return false;
    ++out_cnt[static_cast<size_t>(e.src)];
  }
  for (std::int32_t v = 0; v < n; ++v) {
    const std::int32_t want = (v == g.root) ? 0 : 1;
    if (out_cnt[static_cast<size_t>(v)] != want) return false;
  }
  return true;
}

std::string tree_code(const LocalGraph& g) {
  const std::int32_t n = g.size();
  std::vector<std::vector<std::int32_t>> children(static_cast<size_t>(n));
  for (const auto& e : g.edges)
    children[static_cast<size_t>(e.dst)].push_back(e.src);
  // detect cycles (an edge pointing "up" past the root would recurse forever)
  std::vector<std::string> memo(static_cast<size_t>(n));
  std::vector<std::int8_t> state(static_cast<size_t>(n), 0);
  const std::function<const std::string&(std::int32_t)> code =
      [&](std::int32_t v) -> const std::string& {
    if (state[static_cast<size_t>(v)] == 1)
      throw ModelError("cycle in tree-shaped graph");
    if (state[static_cast<size_t>(v)] == 2) return memo[static_cast<size_t>(v)];
    state[static_cast<size_t>(v)] = 1;
    std::vector<std::string> kids;
    kids.reserve(children[static_cast<size_t>(v)].size());
    for (const std::int32_t c : children[static_cast<size_t>(v)])
      kids.push_back(code(c));
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    s += std::to_string(g.marks[static_cast<size_t>(v)]);
    s += ',';
    s += std::to_string(g.loops[static_cast<size_t>(v)]);
    for (const auto& k : kids) s += k;
    s += ")";
    memo[static_cast<size_t>(v)] = std::move(s);
    state[static_cast<size_t>(v)] = 2;
    return memo[static_cast<size_t>(v)];
  };
  return "T|" + code(g.root);
}

using Colors = std::vector<std::int32_t>;

// reassign colors as lexicographic ranks of per-vertex signatures
Colors refine(const LocalGraph& g, const Adjacency& a, Colors colors) {
  const std::int32_t n = g.size();
  for (;;) {
    std::vector<std::vector<std::int64_t>> sig(static_cast<size_t>(n));
    for (std::int32_t v = 0; v < n; ++v) {
      auto& s = sig[static_cast<size_t>(v)];
      s.push_back(colors[static_cast<size_t>(v)]);
      std::vector<std::pair<std::int64_t, std::int64_t>> nb;
      for (const auto& [u, m] : a.out[static_cast<size_t>(v)])
        nb.emplace_back(m, colors[static_cast<size_t>(u)]);
      std::sort(nb.begin(), nb.end());
      s.push_back(-1);
      for (const auto& [m, c] : nb) {
        s.push_back(m);
        s.push_back(c);
      }
      nb.clear();
      for (const auto& [u, m] : a.in[static_cast<size_t>(v)])
        nb.emplace_back(m, colors[static_cast<size_t>(u)]);
      std::sort(nb.begin(), nb.end());
      s.push_back(-2);
      for (const auto& [m, c] : nb) {
        s.push_back(m);
        s.push_back(c);
      }
    }
    std::vector<std::int32_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
      return sig[static_cast<size_t>(x)] < sig[static_cast<size_t>(y)];
    });
    Colors next(static_cast<size_t>(n), 0);
    std::int32_t c = 0;
    for (std::int32_t k = 0; k < n; ++k) {
      if (k > 0 && sig[static_cast<size_t>(order[static_cast<size_t>(k)])] !=
                       sig[static_cast<size_t>(order[static_cast<size_t>(k - 1)])])
        ++c;
      next[static_cast<size_t>(order[static_cast<size_t>(k)])] = c;
    }
    if (next == colors) return colors;
    colors = std::move(next);
  }
}

std::string encode_ordered(const LocalGraph& g, const Colors& colors) {
  const std::int32_t n = g.size();
  std::vector<std::int32_t> pos(static_cast<size_t>(n));
  for (std::int32_t v = 0; v < n; ++v)
    pos[static_cast<size_t>(v)] = colors[static_cast<size_t>(v)];
  std::ostringstream os;
  os << "G|r" << pos[static_cast<size_t>(g.root)] << '|';
  std::vector<std::pair<std::int32_t, std::int32_t>> by_pos;
  for (std::int32_t v = 0; v < n; ++v)
    by_pos.emplace_back(pos[static_cast<size_t>(v)], v);
  std::sort(by_pos.begin(), by_pos.end());
  for (const auto& [p, v] : by_pos)
    os << 'm' << g.marks[static_cast<size_t>(v)] << 'l'
       << g.loops[static_cast<size_t>(v)] << ';';
  std::vector<std::array<std::int64_t, 3>> es;
  for (const auto& e : g.edges)
    es.push_back({pos[static_cast<size_t>(e.src)],
                  pos[static_cast<size_t>(e.dst)], e.mult});
  std::sort(es.begin(), es.end());
  os << '|';
  for (const auto& e : es) os << e[0] << '>' << e[1] << 'x' << e[2] << ';';
  return os.str();
}

bool is_discrete(const Colors& colors) {
  std::vector<std::int32_t> seen(colors.size(), 0);
  for (const auto c : colors) {
    if (seen[static_cast<size_t>(c)]) return false;
    seen[static_cast<size_t>(c)] = 1;
  }
  return true;
}

std::string canon_search(const LocalGraph& g, const Adjacency& a,
                         const Colors& colors, std::int64_t& budget) {
  if (--budget < 0)
    throw ModelError("canonical code: symmetry budget exhausted");
  if (is_discrete(colors)) return encode_ordered(g, colors);
  const std::int32_t n = g.size();
  // first non-singleton class by color value
  std::int32_t target = -1;
  {
    std::vector<std::int32_t> cnt(static_cast<size_t>(n), 0);
    for (const auto c : colors) ++cnt[static_cast<size_t>(c)];
    for (std::int32_t c = 0; c < n; ++c)
      if (cnt[static_cast<size_t>(c)] >= 2) {
        target = c;
        break;
      }
  }
  std::string best;
  for (std::int32_t v = 0; v < n; ++v) {
    if (colors[static_cast<size_t>(v)] != target) continue;
    Colors ind = colors;
    ind[static_cast<size_t>(v)] = n;  // unique value: individualize v
    const std::string cand = canon_search(g, a, refine(g, a, ind), budget);
    if (best.empty() || cand < best) best = cand;
  }
  return best;
}

}  // namespace

CanonicalCode canonical_code(const LocalGraph& g, std::int32_t max_size) {
  if (g.size() < 1) throw ModelError("empty graph");
  if (g.size() > max_size)
    throw ModelError("graph exceeds the canonical-code size bound");
  if (g.root < 0 || g.root >= g.size()) throw ModelError("bad root index");
  if (is_tree_shaped(g)) return tree_code(g);

  const Adjacency a = build_adjacency(g);
  // initial partition: root flag, distance to root, mark, loop count
  std::vector<std::vector<std::int64_t>> key(static_cast<size_t>(g.size()));
  for (std::int32_t v = 0; v < g.size(); ++v)
    key[static_cast<size_t>(v)] = {v == g.root ? 0 : 1,
                                   a.dist[static_cast<size_t>(v)],
                                   g.marks[static_cast<size_t>(v)],
                                   g.loops[static_cast<size_t>(v)]};
  std::vector<std::int32_t> order(static_cast<size_t>(g.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
    return key[static_cast<size_t>(x)] < key[static_cast<size_t>(y)];
  });
  Colors colors(static_cast<size_t>(g.size()), 0);
  std::int32_t c = 0;
  for (std::int32_t k = 0; k < g.size(); ++k) {
    if (k > 0 && key[static_cast<size_t>(order[static_cast<size_t>(k)])] !=
                     key[static_cast<size_t>(order[static_cast<size_t>(k - 1)])])
      ++c;
    colors[static_cast<size_t>(order[static_cast<size_t>(k)])] = c;
  }
  std::int64_t budget = 200000;
  return canon_search(g, a, refine(g, a, colors), budget);
}

bool is_isomorphic(const LocalGraph& a, const LocalGraph& b,
                   std::int32_t max_size) {
  if (a.size() != b.size()) return false;
  if (a.edges.size() != b.edges.size()) return false;
  return canonical_code(a, max_size) == canonical_code(b, max_size);
}

double neighborhood_frequency(const CollapsedGraph& g,
                              const LocalGraph& target) {
  const CanonicalCode tcode = canonical_code(target);
  const std::int64_t tsize = target.size();
  std::int64_t match = 0;
  for (VertexId i = 1; i <= g.n; ++i) {
    const InComponent comp = in_component(g, i, tsize);
    if (comp.truncated ||
        static_cast<std::int64_t>(comp.vertices.size()) != tsize)
      continue;
    if (canonical_code(local_from_component(comp)) == tcode) ++match;
  }
  return static_cast<double>(match) / static_cast<double>(g.n);
}

double joint_tail_frequency(const CollapsedGraph& g, const PageRankVector& pr,
                            std::int64_t k, double r) {
  if (static_cast<VertexId>(pr.r.size()) != g.n + 1)
    throw ModelError("pagerank vector does not match the graph");
  std::int64_t c = 0;
  for (VertexId v = 1; v <= g.n; ++v)
    if (g.in_mult[static_cast<size_t>(v)] >= k &&
        pr.r[static_cast<size_t>(v)] > r)
      ++c;
  return static_cast<double>(c) / static_cast<double>(g.n);
}

// ---------------------------------------------------------------------------
// Empirical distributions and tests
// ---------------------------------------------------------------------------

void EmpiricalDistribution::add(std::int64_t x, std::int64_t count) {
  counts_[x] += count;
  total_ += count;
}

double EmpiricalDistribution::prob(std::int64_t x) const {
  const auto it = counts_.find(x);
  if (it == counts_.end() || total_ == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total_);
}

double tv_distance(const EmpiricalDistribution& p, const std::vector<double>& q) {
  double acc = 0.0;
  for (std::int64_t x = 0; x < static_cast<std::int64_t>(q.size()); ++x)
    acc += std::abs(p.prob(x) - q[static_cast<size_t>(x)]);
  for (const auto& [x, c] : p.counts())
    if (x < 0 || x >= static_cast<std::int64_t>(q.size()))
      acc += static_cast<double>(c) / static_cast<double>(p.total());
  return 0.5 * acc;
}

double tv_distance(const EmpiricalDistribution& p,
                   const EmpiricalDistribution& q) {
  double acc = 0.0;
  for (const auto& [x, c] : p.counts()) {
    (void)c;
    acc += std::abs(p.prob(x) - q.prob(x));
  }
  for (const auto& [x, c] : q.counts()) {
    (void)c;
    if (p.counts().find(x) == p.counts().end()) acc += q.prob(x);
  }
  return 0.5 * acc;
}

double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

ChiSquareResult chi_square_two_sample(
    const std::map<std::string, std::int64_t>& a,
    const std::map<std::string, std::int64_t>& b, std::int64_t min_pool) {
  std::vector<std::pair<std::int64_t, std::int64_t>> cells;
  std::int64_t pa = 0, pb = 0;
  auto ita = a.begin();
  auto itb = b.begin();
  const auto push = [&](std::int64_t ca, std::int64_t cb) {
    if (ca + cb < min_pool) {
      pa += ca;
      pb += cb;
    } else {
      cells.emplace_back(ca, cb);
    }
  };
  while (ita != a.end() || itb != b.end()) {
    if (itb == b.end() || (ita != a.end() && ita->first < itb->first)) {
      push(ita->second, 0);
      ++ita;
    } else if (ita == a.end() || itb->first < ita->first) {
      push(0, itb->second);
      ++itb;
    } else {
      push(ita->second, itb->second);
      ++ita;
      ++itb;
    }
  }
  if (pa + pb > 0) cells.emplace_back(pa, pb);

  double ta = 0, tb = 0;
  for (const auto& [ca, cb] : cells) {
    ta += static_cast<double>(ca);
    tb += static_cast<double>(cb);
  }
  ChiSquareResult res;
  res.categories = static_cast<std::int64_t>(cells.size());
  if (cells.size() < 2 || ta == 0 || tb == 0) {
    res.df = 0;
    res.p_value = 1.0;
    return res;
  }
  double stat = 0.0;
  for (const auto& [ca, cb] : cells) {
    const double tot = static_cast<double>(ca + cb);
    const double ea = ta * tot / (ta + tb);
    const double eb = tb * tot / (ta + tb);
    stat += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  res.statistic = stat;
  res.df = static_cast<double>(cells.size() - 1);
  res.p_value = chi_square_sf(stat, res.df);
  return res;
}

ChiSquareResult chi_square_goodness(const std::vector<std::int64_t>& observed,
                                    const std::vector<double>& probs) {
  if (observed.size() != probs.size() || observed.empty())
    throw ModelError("observed/probs size mismatch");
  double psum = 0.0;
  std::int64_t ntot = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    psum += probs[i];
    ntot += observed[i];
  }
  if (std::abs(psum - 1.0) > 1e-9)
    throw ModelError("cell probabilities must sum to 1");

  // pool cells whose expectation falls below 5
  std::vector<std::pair<std::int64_t, double>> cells;
  std::int64_t po = 0;
  double pp = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (static_cast<double>(ntot) * probs[i] < 5.0) {
      po += observed[i];
      pp += probs[i];
    } else {
      cells.emplace_back(observed[i], probs[i]);
    }
  }
  if (pp > 0.0) cells.emplace_back(po, pp);

  ChiSquareResult res;
  res.categories = static_cast<std::int64_t>(cells.size());
  if (cells.size() < 2) {
    res.p_value = 1.0;
    return res;
  }
  double stat = 0.0;
  for (const auto& [o, p] : cells) {
    const double e = static_cast<double>(ntot) * p;
    stat += (o - e) * (o - e) / e;
  }
  res.statistic = stat;
  res.df = static_cast<double>(cells.size() - 1);
  res.p_value = chi_square_sf(stat, res.df);
  return res;
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                               double z) {
  WilsonInterval w;
  if (trials <= 0) return w;
  const double nhat = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nhat;
  w.estimate = p;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nhat;
  const double center = (p + z2 / (2.0 * nhat)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nhat + z2 / (4.0 * nhat * nhat)) / denom;
  w.lo = std::max(0.0, center - half);
  w.hi = std::min(1.0, center + half);
  return w;
}

namespace {

double hill_point(const std::vector<double>& sorted_desc, std::int64_t k) {
  double acc = 0.0;
  const double ref = std::log(sorted_desc[static_cast<size_t>(k)]);
  for (std::int64_t i = 0; i < k; ++i)
    acc += std::log(sorted_desc[static_cast<size_t>(i)]) - ref;
  return static_cast<double>(k) / acc;  // tail index = 1 / mean excess
}

}  // namespace

HillEstimate hill_tail_index(std::vector<double> samples, std::int64_t k_order,
                             std::int64_t bootstrap, std::uint64_t seed) {
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  if (k_order < 10 || k_order >= n)
    throw ModelError("hill estimator needs at least 10 exceedances");
  for (const double s : samples)
    if (!(s > 0.0)) throw ModelError("hill estimator requires positive samples");

  std::sort(samples.begin(), samples.end(), std::greater<>());
  HillEstimate est;
  est.k_order = k_order;
  est.sample_count = n;
  est.tail_index = hill_point(samples, k_order);

  if (bootstrap > 0) {
    RngStream rng(seed);
    std::vector<double> boots;
    std::vector<double> re(static_cast<size_t>(n));
    for (std::int64_t b = 0; b < bootstrap; ++b) {
      for (std::int64_t i = 0; i < n; ++i)
        re[static_cast<size_t>(i)] =
            samples[rng.next_below(static_cast<std::uint64_t>(n))];
      std::nth_element(re.begin(), re.begin() + k_order, re.end(),
                       std::greater<>());
      std::sort(re.begin(), re.begin() + k_order + 1, std::greater<>());
      boots.push_back(hill_point(re, k_order));
    }
    double m = 0.0;
    for (const double v : boots) m += v;
    m /= static_cast<double>(boots.size());
    double s2 = 0.0;
    for (const double v : boots) s2 += (v - m) * (v - m);
    est.bootstrap_se =
        std::sqrt(s2 / std::max<std::int64_t>(1, bootstrap - 1));
  }
  return est;
}

std::int64_t hill_default_k(std::int64_t sample_count) {
  return std::max<std::int64_t>(
      10, static_cast<std::int64_t>(2.0 * std::sqrt(
              static_cast<double>(sample_count))));
}

std::vector<HillEstimate> hill_scan(const std::vector<double>& samples,
                                    std::int64_t points) {
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  std::vector<HillEstimate> rows;
  if (n < 40) return rows;
  const double k_lo = 10.0, k_hi = static_cast<double>(n) / 4.0;
  for (std::int64_t p = 0; p < points; ++p) {
    const double frac = points == 1 ? 0.0
                                    : static_cast<double>(p) /
                                          static_cast<double>(points - 1);
    const auto k = static_cast<std::int64_t>(
        std::round(k_lo * std::pow(k_hi / k_lo, frac)));
    rows.push_back(hill_tail_index(samples, k, 30, 7));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

std::vector<BirthTimeDiagnosticRow> birth_time_diagnostic(const LiftedRun& run,
                                                          double lambda) {
  if (!(lambda > 0.0)) throw ModelError("lambda must be positive");
  const NodeId n = run.node_count;
  // a_k = sigma_k - log(k)/lambda;  sup over pairs = suffix max - suffix min
  std::vector<double> a(static_cast<size_t>(n) + 1, 0.0);
  for (NodeId k = 1; k <= n; ++k)
    a[static_cast<size_t>(k)] = run.sigma[static_cast<size_t>(k)] -
                                std::log(static_cast<double>(k)) / lambda;
  std::vector<double> smax(static_cast<size_t>(n) + 2,
                           -std::numeric_limits<double>::infinity());
  std::vector<double> smin(static_cast<size_t>(n) + 2,
                           std::numeric_limits<double>::infinity());
  for (NodeId k = n; k >= 1; --k) {
    smax[static_cast<size_t>(k)] =
        std::max(smax[static_cast<size_t>(k) + 1], a[static_cast<size_t>(k)]);
    smin[static_cast<size_t>(k)] =
        std::min(smin[static_cast<size_t>(k) + 1], a[static_cast<size_t>(k)]);
  }
  std::vector<BirthTimeDiagnosticRow> rows;
  for (NodeId m = 10; m * 10 <= n; m *= 10)
    rows.push_back(
        {m, smax[static_cast<size_t>(m)] - smin[static_cast<size_t>(m)]});
  return rows;
}

std::vector<ExpectationBoundRow> expectation_bound_check(
    const AttachmentKernel& kernel, const OutDegreeDistribution& dist,
    const std::vector<double>& t_grid, std::int64_t samples, RngStream rng,
    std::int64_t node_cap) {
  if (samples < 2) throw ModelError("need at least 2 samples");
  const OutDegreeSampler sampler = dist.sampler();
  const double mu = dist.mean();
  std::vector<ExpectationBoundRow> rows;
  for (size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    double sum = 0.0, sum2 = 0.0;
    std::int64_t kept = 0;
    for (std::int64_t s = 0; s < samples; ++s) {
      RngStream st = rng.child(ti * 1000003 + static_cast<std::uint64_t>(s));
      const MarkedTree tree =
          grow_marked_ctbp(kernel, sampler, t, st, node_cap);
      if (tree.capped()) continue;
      const double lam =
          static_cast<double>(tree.size() + tree.mark_sum());
      sum += lam;
      sum2 += lam * lam;
      ++kept;
    }
    ExpectationBoundRow row;
    row.t = t;
    row.empirical_mean = sum / static_cast<double>(kept);
    const double var = (sum2 - sum * sum / static_cast<double>(kept)) /
                       static_cast<double>(kept - 1);
    row.standard_error = std::sqrt(std::max(0.0, var) /
                                   static_cast<double>(kept));
    row.bound =
        1.0 + mu * std::exp(kernel.cf() * (mu + 1.0) * t);
    row.violated = row.empirical_mean > row.bound + 3.0 * row.standard_error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cbp
