#include "cbp/limit.hpp"

#include <cmath>

namespace cbp {

StoppedLimitTree sample_stopped_tree(const AttachmentKernel& kernel,
                                     const OutDegreeDistribution& dist,
                                     double lambda, RngStream& rng,
                                     std::int64_t node_cap) {
  if (!(lambda > 0.0)) throw ModelError("lambda must be positive");
  StoppedLimitTree out;
  out.lambda = lambda;
  out.chi = rng.next_exponential(lambda);
  out.tree = grow_marked_ctbp(kernel, dist.sampler(), out.chi, rng, node_cap);
  out.capped = out.tree.capped();
  return out;
}

std::int64_t root_in_degree(const StoppedLimitTree& t) {
  return t.tree.children_count(1);
}

double root_pagerank(const StoppedLimitTree& t, double damping) {
  if (t.capped) throw ModelError("refusing PageRank on a capped sample");
  if (!(damping > 0.0 && damping < 1.0))
    throw ModelError("damping must lie in (0,1)");
  const MarkedTree& tree = t.tree;
  const NodeId n = tree.size();
  std::vector<double> r(static_cast<size_t>(n) + 1, 1.0 - damping);
  // children carry larger ids in engine-grown trees; the bottom-up sweep
  // needs that ordering
  for (NodeId v = n; v >= 2; --v) {
    const auto& node = tree.node(v);
    if (node.parent >= v)
      throw ModelError("tree ids are not in parent-before-child order");
    r[static_cast<size_t>(node.parent)] +=
        damping * r[static_cast<size_t>(v)] / static_cast<double>(node.mark);
  }
  return r[1];
}

RootStatistics root_statistics(const StoppedLimitTree& t, double damping) {
  RootStatistics rs;
  rs.n_root = root_in_degree(t);
  rs.r_root = root_pagerank(t, damping);
  rs.size = t.tree.size();
  return rs;
}

std::int64_t sample_root_in_degree(const AttachmentKernel& kernel,
                                   const OutDegreeDistribution& dist,
                                   double lambda, RngStream& rng,
                                   std::int64_t count_cap) {
  if (!(lambda > 0.0)) throw ModelError("lambda must be positive");
  const double chi = rng.next_exponential(lambda);
  const std::int32_t d = dist.sample(rng);
  std::int64_t total = 0;
  for (std::int32_t slot = 0; slot < d; ++slot) {
    double t = 0.0;
    std::int64_t s = 0;
    for (;;) {
      t += rng.next_exponential(kernel(s + 1));
      if (t > chi) break;
      ++s;
      if (total + s > count_cap)
        throw ModelError("root in-degree sample exceeded count_cap");
    }
    total += s;
  }
  return total;
}

double closed_form_pa_pmf(double beta, const OutDegreeDistribution& dist,
                          std::int64_t x, std::int64_t d_cut) {
  if (!(beta > -1.0)) throw ModelError("preferential pmf requires beta > -1");
  if (x < 0) throw ModelError("pmf argument must be >= 0");
  const std::int64_t dmax =
      std::min<std::int64_t>(d_cut, dist.max_support());
  double sum = 0.0;
  const double xx = static_cast<double>(x);
  for (std::int64_t d = 1; d <= dmax; ++d) {
    const double h = dist.pmf(d);
    if (h == 0.0) continue;
    const double a = static_cast<double>(d) * (beta + 1.0);
    const double lg = std::log(2.0 + beta) + std::lgamma(2.0 + beta + a) +
                      std::lgamma(xx + a) - std::lgamma(a) -
                      std::lgamma(xx + a + 3.0 + beta);
    sum += h * std::exp(lg);
  }
  return sum;
}

double closed_form_ua_pmf(const OutDegreeDistribution& dist, std::int64_t x,
                          std::int64_t d_cut) {
  if (x < 0) throw ModelError("pmf argument must be >= 0");
  const std::int64_t dmax =
      std::min<std::int64_t>(d_cut, dist.max_support());
  double sum = 0.0;
  for (std::int64_t d = 1; d <= dmax; ++d) {
    const double h = dist.pmf(d);
    if (h == 0.0) continue;
    const double dd = static_cast<double>(d);
    sum += h / (dd + 1.0) *
           std::exp(static_cast<double>(x) * std::log(dd / (dd + 1.0)));
  }
  return sum;
}

double predicted_tail_exponent(LimitModel model, double beta, double gamma) {
  if (!std::isfinite(gamma)) throw ModelError("gamma must be finite");
  switch (model) {
    case LimitModel::preferential:
      return std::min(3.0 + beta, gamma);
    case LimitModel::uniform:
      return gamma;
  }
  return gamma;  // unreachable
}

}  // namespace cbp
