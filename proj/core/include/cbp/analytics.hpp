#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cbp/collapse.hpp"
#include "cbp/engine.hpp"

namespace cbp {

// ---------------------------------------------------------------------------
// PageRank
// ---------------------------------------------------------------------------

// Scale-free PageRank R = |V| pi for pi = pi (c P) + (1-c) q, with P built
// from the degree-normalized adjacency (multiplicities and self-loops kept)
// and zero rows replaced by the uniform vector before damping.
struct PageRankVector {
  std::vector<double> r;  // [1..n]
  double damping = 0.0;
  std::int64_t iterations = 0;
  double residual = 0.0;  // L1 change of the last sweep
};

PageRankVector graph_pagerank(const CollapsedGraph& g, double damping,
                              double tol = 1e-10,
                              std::int64_t max_iter = 10000);

// ---------------------------------------------------------------------------
// Rooted marked multigraphs, canonical codes, isomorphism
// ---------------------------------------------------------------------------

// Compact rooted marked multigraph on local indices 0..size-1.
struct LocalGraph {
  std::int32_t root = 0;
  std::vector<std::int32_t> marks;
  std::vector<std::int32_t> loops;
  struct E {
    std::int32_t src, dst;
    std::int64_t mult;
  };
  std::vector<E> edges;  // src != dst

  std::int32_t size() const { return static_cast<std::int32_t>(marks.size()); }
};

LocalGraph local_from_component(const InComponent& comp);
// discrete skeleton of the tree at time t (nodes born <= t)
LocalGraph local_from_tree(const MarkedTree& tree, double t);
// build a marked rooted tree target from parent links (parent[0] ignored,
// parent of node k is parents[k] < k) and marks
LocalGraph local_tree_target(const std::vector<std::int32_t>& parents,
                             const std::vector<std::int32_t>& marks);

using CanonicalCode = std::string;

// Canonical form of a rooted marked multigraph under mark-, loop- and
// multiplicity-preserving root-fixing bijections. Iterative refinement from
// (distance to root, mark, loop count) with individualization backtracking
// on residual symmetry; tree-shaped inputs take a sorted child-code fast
// path. Throws past max_size.
CanonicalCode canonical_code(const LocalGraph& g, std::int32_t max_size = 1000);

bool is_isomorphic(const LocalGraph& a, const LocalGraph& b,
                   std::int32_t max_size = 1000);

// fraction of vertices whose in-component matches the target, marks
// included; components larger than the target are rejected during
// exploration without being fully built
double neighborhood_frequency(const CollapsedGraph& g, const LocalGraph& target);

// empirical joint tail (1/n) sum_i 1(in_mult_i >= k, R_i > r)
double joint_tail_frequency(const CollapsedGraph& g, const PageRankVector& pr,
                            std::int64_t k, double r);

// ---------------------------------------------------------------------------
// Empirical distributions and statistics
// ---------------------------------------------------------------------------

class EmpiricalDistribution {
 public:
  void add(std::int64_t x, std::int64_t count = 1);
  std::int64_t total() const { return total_; }
  double prob(std::int64_t x) const;
  const std::map<std::int64_t, std::int64_t>& counts() const { return counts_; }

 private:
  std::map<std::int64_t, std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// half L1 distance; q lives on {0, ..., q.size()-1} and is zero elsewhere
double tv_distance(const EmpiricalDistribution& p, const std::vector<double>& q);
double tv_distance(const EmpiricalDistribution& p,
                   const EmpiricalDistribution& q);

struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  std::int64_t categories = 0;
};

// two-sample homogeneity test over shared keys; cells with combined count
// below min_pool are pooled into one bucket
ChiSquareResult chi_square_two_sample(
    const std::map<std::string, std::int64_t>& a,
    const std::map<std::string, std::int64_t>& b, std::int64_t min_pool = 10);

// goodness of fit of observed counts against exact cell probabilities
ChiSquareResult chi_square_goodness(const std::vector<std::int64_t>& observed,
                                    const std::vector<double>& probs);

// chi-square survival function P(X_df > x)
double chi_square_sf(double x, double df);

struct WilsonInterval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                               double z = 1.959963984540054);

struct HillEstimate {
  double tail_index = 0.0;
  double bootstrap_se = 0.0;
  std::int64_t k_order = 0;
  std::int64_t sample_count = 0;
};

// Hill estimator of the tail index over the top k_order order statistics,
// with a bootstrap standard error. Requires at least 10 exceedances.
HillEstimate hill_tail_index(std::vector<double> samples, std::int64_t k_order,
                             std::int64_t bootstrap = 200,
                             std::uint64_t seed = 1);

std::int64_t hill_default_k(std::int64_t sample_count);  // 2 sqrt(N)

// tail-index estimates over a geometric grid of k (the plateau scan)
std::vector<HillEstimate> hill_scan(const std::vector<double>& samples,
                                    std::int64_t points = 12);

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct BirthTimeDiagnosticRow {
  std::int64_t m = 0;
  double sup_deviation = 0.0;  // sup_{k,j >= m} |sigma_k - sigma_j - log(k/j)/lambda|
};

// evaluated on the decades m = 10, 100, ... up to node_count / 10
std::vector<BirthTimeDiagnosticRow> birth_time_diagnostic(const LiftedRun& run,
                                                          double lambda);

struct ExpectationBoundRow {
  double t = 0.0;
  double empirical_mean = 0.0;  // mean of |tree| + sum of marks at t
  double standard_error = 0.0;
  double bound = 0.0;  // 1 + mu exp(C_f (mu+1) t)
  bool violated = false;  // mean exceeds bound by more than 3 s.e.
};

std::vector<ExpectationBoundRow> expectation_bound_check(
    const AttachmentKernel& kernel, const OutDegreeDistribution& dist,
    const std::vector<double>& t_grid, std::int64_t samples, RngStream rng,
    std::int64_t node_cap = 1000000);

}  // namespace cbp
