#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cbp/analytics.hpp"
#include "cbp/limit.hpp"
#include "test_support.hpp"

using namespace cbp;

TEST_CASE("stopped tree: huge lambda leaves no time to reproduce") {
  const auto kernel = AttachmentKernel::constant(2.0);
  const auto dist = OutDegreeDistribution::from_pmf({0.5, 0.5});
  RngStream rng(401);
  int nontrivial = 0;
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    RngStream st = rng.child(s);
    const auto t = sample_stopped_tree(kernel, dist, 1e6, st, 1000);
    if (t.tree.size() > 1) ++nontrivial;
  }
  CHECK(static_cast<double>(nontrivial) / samples < 1e-3);
}

TEST_CASE("stopped tree: determinism under a fixed stream") {
  const auto kernel = AttachmentKernel::linear(1, 0);
  const auto dist = OutDegreeDistribution::degenerate(2);
  RngStream a(402), b(402);
  const auto ta = sample_stopped_tree(kernel, dist, 2.0, a, 100000);
  const auto tb = sample_stopped_tree(kernel, dist, 2.0, b, 100000);
  CHECK(ta.chi == tb.chi);
  REQUIRE(ta.tree.size() == tb.tree.size());
  for (NodeId v = 1; v <= ta.tree.size(); ++v) {
    CHECK(ta.tree.node(v).parent == tb.tree.node(v).parent);
    CHECK(ta.tree.node(v).birth_time == tb.tree.node(v).birth_time);
  }
}

TEST_CASE("root in-degree counts depth-one nodes only") {
  auto tree = MarkedTree::single_root(2);
  CHECK(tree.children_count(1) == 0);
  const NodeId c1 = tree.add_child(1, 1, 1, 0.5);
  tree.add_child(1, 2, 1, 0.7);
  tree.add_child(c1, 1, 1, 0.9);  // grandchild, not counted
  StoppedLimitTree t;
  t.tree = tree;
  t.chi = 1.0;
  t.lambda = 1.0;
  CHECK(root_in_degree(t) == 2);
}

TEST_CASE("root pagerank: hand-evaluated recursions") {
  const double c = 0.5;

  SUBCASE("root only") {
    StoppedLimitTree t;
    t.tree = MarkedTree::single_root(3);
    CHECK(root_pagerank(t, c) == doctest::Approx(1.0 - c));
  }
  SUBCASE("one leaf child of mark 1") {
    StoppedLimitTree t;
    auto tree = MarkedTree::single_root(1);
    tree.add_child(1, 1, 1, 0.1);
    t.tree = tree;
    CHECK(root_pagerank(t, c) == doctest::Approx(0.75));
  }
  SUBCASE("two leaf children with marks 1 and 2") {
    StoppedLimitTree t;
    auto tree = MarkedTree::single_root(1);
    tree.add_child(1, 1, 1, 0.1);
    tree.add_child(1, 1, 2, 0.2);
    t.tree = tree;
    CHECK(root_pagerank(t, c) == doctest::Approx(0.875));
  }
  SUBCASE("floor 1 - c holds everywhere") {
    const auto kernel = AttachmentKernel::linear(1, 0);
    const auto dist = OutDegreeDistribution::from_pmf({0.7, 0.3});
    RngStream rng(403);
    for (int s = 0; s < 200; ++s) {
      RngStream st = rng.child(s);
      const auto t = sample_stopped_tree(kernel, dist, 2.0, st, 100000);
      if (t.capped) continue;
      CHECK(root_pagerank(t, c) >= 1.0 - c - 1e-12);
    }
  }
  SUBCASE("capped samples are refused") {
    StoppedLimitTree t;
    t.tree = MarkedTree::single_root(1);
    t.capped = true;
    CHECK_THROWS_AS(root_pagerank(t, c), ModelError);
  }
}

TEST_CASE("uniform-attachment pmf: closed form anchors") {
  const auto d1 = OutDegreeDistribution::degenerate(1);
  CHECK(closed_form_ua_pmf(d1, 0) == doctest::Approx(0.5));
  CHECK(closed_form_ua_pmf(d1, 3) == doctest::Approx(0.0625));

  // geometric normalization for a point mass
  const auto d3 = OutDegreeDistribution::degenerate(3);
  double sum = 0.0;
  for (int x = 0; x < 400; ++x) sum += closed_form_ua_pmf(d3, x);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));

  const auto mix = OutDegreeDistribution::from_pmf({0.5, 0.5});
  CHECK(closed_form_ua_pmf(mix, 0) == doctest::Approx(5.0 / 12.0));
}

TEST_CASE("preferential-attachment pmf: gamma-ratio anchors") {
  const auto d1 = OutDegreeDistribution::degenerate(1);
  // beta = 0, d = 1: 2 * Gamma(3) Gamma(x+1) / (Gamma(1) Gamma(x+4))
  CHECK(closed_form_pa_pmf(0.0, d1, 0) == doctest::Approx(2.0 / 3.0));

  // oracle: the partial-fraction telescoping of 4/((x+1)(x+2)(x+3))
  double telescope = 0.0;
  for (int x = 0; x < 2000; ++x)
    telescope +=
        4.0 / ((x + 1.0) * (x + 2.0) * (x + 3.0));
  CHECK(telescope == doctest::Approx(1.0).epsilon(1e-6));
  double sum = 0.0;
  for (int x = 0; x < 2000; ++x) {
    const double p = closed_form_pa_pmf(0.0, d1, x);
    CHECK(p >= 0.0);
    CHECK(p == doctest::Approx(4.0 / ((x + 1.0) * (x + 2.0) * (x + 3.0)))
                   .epsilon(1e-9));
    sum += p;
  }
  CHECK(sum == doctest::Approx(telescope).epsilon(1e-9));

  CHECK_THROWS_AS(closed_form_pa_pmf(-1.0, d1, 0), ModelError);

  // negative offsets stay normalized
  double neg_sum = 0.0;
  for (int x = 0; x < 5000; ++x) neg_sum += closed_form_pa_pmf(-0.5, d1, x);
  CHECK(neg_sum == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("predicted tail exponents follow the min rule") {
  CHECK(predicted_tail_exponent(LimitModel::preferential, 0.0, 2.5) ==
        doctest::Approx(2.5));
  CHECK(predicted_tail_exponent(LimitModel::preferential, 0.0, 5.0) ==
        doctest::Approx(3.0));
  CHECK(predicted_tail_exponent(LimitModel::uniform, 0.7, 2.5) ==
        doctest::Approx(2.5));
}

TEST_CASE("fast root-degree sampler agrees with the full tree sampler") {
  const auto kernel = AttachmentKernel::linear(1, 0);
  const auto dist = OutDegreeDistribution::from_pmf({0.5, 0.5});
  const double lambda = 2.0 + 0.0;
  RngStream rng(404);
  std::map<std::string, std::int64_t> fast, full;
  for (int s = 0; s < 30000; ++s) {
    RngStream st = rng.child(s);
    ++fast[std::to_string(sample_root_in_degree(kernel, dist, lambda, st))];
  }
  for (int s = 0; s < 30000; ++s) {
    RngStream st = rng.child(900000 + s);
    const auto t = sample_stopped_tree(kernel, dist, lambda, st, 200000);
    if (t.capped) continue;
    ++full[std::to_string(root_in_degree(t))];
  }
  const auto cs = chi_square_two_sample(fast, full);
  CHECK(cs.p_value > 1e-3);
}

TEST_CASE("stopped-tree root degree matches the uniform closed form") {
  // small version of the distributional check (the acceptance suite runs
  // the full-size one): f = 1, D = 1, lambda = 1, TV against 2^-(x+1)
  const auto kernel = AttachmentKernel::constant(1.0);
  const auto dist = OutDegreeDistribution::degenerate(1);
  RngStream rng(405);
  EmpiricalDistribution emp;
  for (int s = 0; s < 40000; ++s) {
    RngStream st = rng.child(s);
    emp.add(sample_root_in_degree(kernel, dist, 1.0, st));
  }
  std::vector<double> pmf;
  for (int x = 0; x <= 50; ++x) pmf.push_back(closed_form_ua_pmf(dist, x));
  CHECK(tv_distance(emp, pmf) <= 0.02);
}
