#pragma once

#include <cstdint>

#include "cbp/collapse.hpp"
#include "cbp/engine.hpp"

namespace cbp {

// Marked tree stopped at an independent exponential time chi with the
// Malthusian rate. The sampled local picture around a typical vertex.
struct StoppedLimitTree {
  MarkedTree tree = MarkedTree::single_root(1);
  double chi = 0.0;
  double lambda = 0.0;
  bool capped = false;
};

StoppedLimitTree sample_stopped_tree(const AttachmentKernel& kernel,
                                     const OutDegreeDistribution& dist,
                                     double lambda, RngStream& rng,
                                     std::int64_t node_cap);

// root in-degree (number of the root's children)
std::int64_t root_in_degree(const StoppedLimitTree& t);

// PageRank of the root: bottom-up R_v = c sum_children R_u / D_u + (1 - c),
// exact on the stopped tree. Refuses capped samples (they are biased).
double root_pagerank(const StoppedLimitTree& t, double damping);

struct RootStatistics {
  std::int64_t n_root = 0;
  double r_root = 0.0;
  std::int64_t size = 0;
};

RootStatistics root_statistics(const StoppedLimitTree& t, double damping);

// Root in-degree drawn without building the tree: the root's reproduction
// process is a superposition of D independent pure births, independent of
// everything below depth one, so this has exactly the law of
// root_in_degree(sample_stopped_tree(...)). count_cap guards heavy tails.
std::int64_t sample_root_in_degree(const AttachmentKernel& kernel,
                                   const OutDegreeDistribution& dist,
                                   double lambda, RngStream& rng,
                                   std::int64_t count_cap = (1 << 30));

// In-degree pmf of the root for f(k) = k + beta: mixture over the mark law
// of a gamma-ratio kernel, evaluated by lgamma differences and truncated at
// d_cut (nonnegative terms; the dropped tail is bounded by the mark law's
// tail mass).
double closed_form_pa_pmf(double beta, const OutDegreeDistribution& dist,
                          std::int64_t x, std::int64_t d_cut = 10000);

// In-degree pmf of the root for constant kernels: mixture of geometrics
// (free of the kernel level).
double closed_form_ua_pmf(const OutDegreeDistribution& dist, std::int64_t x,
                          std::int64_t d_cut = 10000);

enum class LimitModel { preferential, uniform };

// Predicted regular-variation exponent of the root in-degree pmf when the
// mark pmf decays with exponent gamma: min(3 + beta, gamma) for
// preferential attachment, gamma for uniform attachment. The survival
// function of the (integer-valued) in-degree then carries index one less.
double predicted_tail_exponent(LimitModel model, double beta, double gamma);

}  // namespace cbp
