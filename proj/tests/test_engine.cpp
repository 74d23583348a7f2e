#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cbp/analytics.hpp"
#include "cbp/engine.hpp"
#include "test_support.hpp"

using namespace cbp;

TEST_CASE("weighted index: updates, totals and proportional draws") {
  WeightedIndex wi(8);
  wi.set(1, 2.0);
  wi.set(5, 6.0);
  CHECK(wi.total() == doctest::Approx(8.0));
  CHECK(wi.sample(0.1) == 1);   // 0.8 of mass 8 falls in [0,2]
  CHECK(wi.sample(0.25) == 1);  // boundary resolves to the lower id
  CHECK(wi.sample(0.26) == 5);
  CHECK(wi.sample(1.0) == 5);
  wi.set(5, 0.0);
  CHECK(wi.total() == doctest::Approx(2.0));
  CHECK(wi.sample(1.0) == 1);
}

TEST_CASE("pure birth: first holding time has mean 1/f(1)") {
  const auto k = AttachmentKernel::constant(2.0);
  RngStream rng(101);
  std::vector<double> tau1;
  for (int r = 0; r < 100000; ++r) {
    RngStream st = rng.child(r);
    const auto ev = simulate_pure_birth(k, 1e30, 1, st);
    tau1.push_back(ev.at(0));
  }
  const auto ms = testsup::mean_se(tau1);
  CHECK(std::abs(ms.mean - 0.5) <= 3.0 * ms.se);
}

TEST_CASE("pure birth: constant rates give Poisson inter-arrivals") {
  const auto k = AttachmentKernel::constant(1.5);
  RngStream rng(102);
  std::vector<double> gaps;
  for (int r = 0; r < 100000; ++r) {
    RngStream st = rng.child(r);
    const auto ev = simulate_pure_birth(k, 1e30, 2, st);
    gaps.push_back(ev.at(1) - ev.at(0));
  }
  const auto ms = testsup::mean_se(gaps);
  CHECK(std::abs(ms.mean - 1.0 / 1.5) <= 3.0 * ms.se);
}

TEST_CASE("pure birth: identity kernel mean count solves m' = m + 1") {
  // oracle: integrate the mean ODE rather than trusting exp(t) - 1
  const double expected = testsup::rk4(
      [](double, double m) { return m + 1.0; }, 0.0, 0.0, 1.0, 1000);
  CHECK(expected == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-9));

  const auto k = AttachmentKernel::linear(1, 0);
  RngStream rng(103);
  std::vector<double> counts;
  for (int r = 0; r < 100000; ++r) {
    RngStream st = rng.child(r);
    counts.push_back(
        static_cast<double>(simulate_pure_birth(k, 1.0, 1 << 20, st).size()));
  }
  const auto ms = testsup::mean_se(counts);
  CHECK(std::abs(ms.mean - expected) <= 3.0 * ms.se);
}

TEST_CASE("lifted run: two nodes force the only candidate") {
  const auto k = AttachmentKernel::linear(1, 0);
  RngStream rng(104);
  std::vector<double> sigma2;
  for (int r = 0; r < 20000; ++r) {
    const auto run = grow_lifted_run(k, 2, {}, rng.child(r));
    CHECK(run.parent[2] == 1);
    sigma2.push_back(run.sigma[2]);
  }
  const auto ms = testsup::mean_se(sigma2);
  CHECK(std::abs(ms.mean - 1.0) <= 3.0 * ms.se);  // Exp(f(1)) with f(1)=1
}

TEST_CASE("lifted run: attachment frequencies match the exact two-candidate ratio") {
  const auto k = AttachmentKernel::linear(1, 0);
  RngStream rng(105);
  const int replicas = 100000;
  std::int64_t to_first = 0;
  for (int r = 0; r < replicas; ++r) {
    const auto run = grow_lifted_run(k, 3, {}, rng.child(r));
    if (run.parent[3] == 1) ++to_first;
  }
  // P(parent of node 3 = 1) = f(2)/(f(2)+f(1)) = 2/3
  const auto cs = chi_square_goodness({to_first, replicas - to_first},
                                      {2.0 / 3.0, 1.0 / 3.0});
  CHECK(cs.p_value > 1e-3);
}

TEST_CASE("lifted run: fixed seed reproduces the realization") {
  const auto k = AttachmentKernel::linear(1, 0.5);
  const auto a = grow_lifted_run(k, 200, {}, RngStream(42).child(7));
  const auto b = grow_lifted_run(k, 200, {}, RngStream(42).child(7));
  CHECK(a.sigma == b.sigma);
  CHECK(a.parent == b.parent);
  const auto c = grow_lifted_run(k, 200, {}, RngStream(42).child(8));
  CHECK(a.parent != c.parent);
}

TEST_CASE("lifted run invariants: parents are older, degrees consistent") {
  const auto k = AttachmentKernel::linear(1, 1);
  const auto run = grow_lifted_run(k, 5000, {}, RngStream(9));
  std::vector<std::int32_t> indeg(5001, 0);
  for (NodeId v = 2; v <= run.node_count; ++v) {
    CHECK(run.parent[static_cast<size_t>(v)] < v);
    CHECK(run.sigma[static_cast<size_t>(v)] >=
          run.sigma[static_cast<size_t>(v - 1)]);
    ++indeg[static_cast<size_t>(run.parent[static_cast<size_t>(v)])];
  }
  for (NodeId v = 1; v <= run.node_count; ++v)
    CHECK(indeg[static_cast<size_t>(v)] ==
          run.in_degree[static_cast<size_t>(v)]);
  CHECK(run.sigma[1] == 0.0);
}

TEST_CASE("marked tree: zero horizon stays root-only") {
  const auto k = AttachmentKernel::linear(1, 0);
  RngStream rng(106);
  const auto sampler = [](RngStream&) { return std::int32_t{3}; };
  const auto tree = grow_marked_ctbp(k, sampler, 0.0, rng, 1000);
  CHECK(tree.size() == 1);
  CHECK(tree.node(1).mark == 3);
}

TEST_CASE("marked tree: root child count is Poisson(d beta t) for flat rates") {
  const auto k = AttachmentKernel::constant(0.8);
  RngStream rng(107);
  const auto sampler = [](RngStream&) { return std::int32_t{2}; };
  std::vector<double> counts;
  for (int r = 0; r < 100000; ++r) {
    RngStream st = rng.child(r);
    const auto tree = grow_marked_ctbp(k, sampler, 1.25, st, 100000);
    REQUIRE(!tree.capped());
    counts.push_back(static_cast<double>(tree.root_children_at(1.25)));
  }
  const auto ms = testsup::mean_se(counts);
  CHECK(std::abs(ms.mean - 2.0 * 0.8 * 1.25) <= 3.0 * ms.se);
}

TEST_CASE("marked tree: identity kernel root children follow the mean ODE") {
  const double expected = testsup::rk4(
      [](double, double m) { return m + 1.0; }, 0.0, 0.0, 1.0, 1000);
  const auto k = AttachmentKernel::linear(1, 0);
  RngStream rng(108);
  const auto sampler = [](RngStream&) { return std::int32_t{1}; };
  std::vector<double> counts;
  for (int r = 0; r < 100000; ++r) {
    RngStream st = rng.child(r);
    const auto tree = grow_marked_ctbp(k, sampler, 1.0, st, 1 << 20);
    REQUIRE(!tree.capped());
    counts.push_back(static_cast<double>(tree.root_children_at(1.0)));
  }
  const auto ms = testsup::mean_se(counts);
  CHECK(std::abs(ms.mean - expected) <= 3.0 * ms.se);
}

TEST_CASE("marked tree: slot bookkeeping and birth ordering invariants") {
  const auto k = AttachmentKernel::linear(1, 0.5);
  RngStream rng(109);
  const auto sampler = [](RngStream& r) {
    return static_cast<std::int32_t>(1 + r.next_below(3));
  };
  const auto tree = grow_marked_ctbp(k, sampler, 2.0, rng, 1 << 20);
  for (NodeId v = 1; v <= tree.size(); ++v) {
    std::int64_t slot_total = 0;
    for (std::int32_t s = 1; s <= tree.node(v).mark; ++s)
      slot_total += tree.slot_state(v, s);
    CHECK(slot_total == tree.children_count(v));
    if (v >= 2)
      CHECK(tree.node(v).birth_time >=
            tree.node(tree.node(v).parent).birth_time);
  }
}

TEST_CASE("marked tree: queue-driven root matches direct per-slot simulation") {
  // memorylessness discipline: the root's child count at t from the full
  // engine must agree with summing two independent pure-birth processes
  const auto k = AttachmentKernel::linear(1, 0);
  const double t = 0.7;
  RngStream rng(110);
  std::map<std::string, std::int64_t> engine_counts, direct_counts;
  for (int r = 0; r < 30000; ++r) {
    RngStream st = rng.child(r);
    const auto sampler = [](RngStream&) { return std::int32_t{2}; };
    const auto tree = grow_marked_ctbp(k, sampler, t, st, 1 << 20);
    ++engine_counts[std::to_string(tree.root_children_at(t))];
  }
  for (int r = 0; r < 30000; ++r) {
    RngStream st = rng.child(500000 + r);
    std::int64_t total = 0;
    for (int slot = 0; slot < 2; ++slot)
      total += static_cast<std::int64_t>(
          simulate_pure_birth(k, t, 1 << 20, st).size());
    ++direct_counts[std::to_string(total)];
  }
  const auto cs = chi_square_two_sample(engine_counts, direct_counts);
  CHECK(cs.p_value > 1e-3);
}

TEST_CASE("marked tree: child addressing follows birth order") {
  auto tree = MarkedTree::single_root(2);
  const NodeId late = tree.add_child(1, 1, 1, 0.9);   // born second
  const NodeId early = tree.add_child(1, 2, 1, 0.4);  // born first
  const NodeId grand = tree.add_child(early, 1, 1, 0.8);
  CHECK(tree.address_of(early) == std::vector<std::int64_t>{1});
  CHECK(tree.address_of(late) == std::vector<std::int64_t>{2});
  CHECK(tree.address_of(grand) == std::vector<std::int64_t>{1, 1});
  CHECK(tree.address_of(1).empty());
}

TEST_CASE("marked tree: continued evolution respects late birth times") {
  // a node born after the resume point must not reproduce before its birth
  const auto k = AttachmentKernel::linear(1, 0);
  const auto sampler = [](RngStream&) { return std::int32_t{1}; };
  RngStream rng(112);
  for (int rep = 0; rep < 200; ++rep) {
    auto tree = MarkedTree::single_root(1, 0.0);
    tree.add_child(1, 1, 1, 5.0);  // late arrival
    RngStream st = rng.child(rep);
    evolve_marked_tree(tree, k, sampler, 0.0, 6.0, st, 1 << 16);
    for (NodeId v = 2; v <= tree.size(); ++v)
      CHECK(tree.node(v).birth_time >=
            tree.node(tree.node(v).parent).birth_time);
  }
}

TEST_CASE("marked tree: node cap flags the sample") {
  const auto k = AttachmentKernel::linear(1, 0);
  RngStream rng(111);
  const auto sampler = [](RngStream&) { return std::int32_t{1}; };
  const auto tree = grow_marked_ctbp(k, sampler, 50.0, rng, 64);
  CHECK(tree.capped());
  CHECK(tree.size() <= 64);
}
