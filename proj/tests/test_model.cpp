#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "brute.hpp"
#include "mixmap/errors.hpp"
#include "mixmap/generators.hpp"
#include "mixmap/model.hpp"
#include "mixmap/oracle.hpp"

using namespace mixmap;

TEST_SUITE("model") {
  TEST_CASE("energy of a zero-potential single variable") {
    PairwiseModel m({2}, {Role::Sum}, {{0.0, 0.0}}, {}, {});
    CHECK(energy(m, {0}) == 0.0);
  }

  TEST_CASE("weather energy of (rainy, drive)") {
    CHECK(energy(brute::weather(), {0, 1}) == doctest::Approx(std::log(0.35)).epsilon(1e-14));
  }

  TEST_CASE("pairwise table lookup") {
    PairwiseModel m({2, 2}, {Role::Sum, Role::Sum}, {{0, 0}, {0, 0}}, {{0, 1}},
                    {{std::log(3.0), 0.0, 0.0, std::log(2.0)}});
    CHECK(energy(m, {0, 0}) == doctest::Approx(std::log(3.0)));
    CHECK(energy(m, {1, 1}) == doctest::Approx(std::log(2.0)));
    CHECK(energy(m, {0, 1}) == 0.0);
  }

  TEST_CASE("out-of-range state is an invalid configuration") {
    CHECK_THROWS_AS(energy(brute::weather(), {2, 0}), InvalidConfiguration);
    CHECK_THROWS_AS(energy(brute::weather(), {0}), InvalidConfiguration);
    CHECK_THROWS_AS(energy(brute::weather(), {-1, 0}), InvalidConfiguration);
  }

  TEST_CASE("construction rejects malformed models") {
    CHECK_THROWS_AS(PairwiseModel({2, 2}, {Role::Sum, Role::Sum}, {{0, 0}, {0, 0}}, {{0, 0}}, {{0, 0, 0, 0}}),
                    InvalidArgument);
    CHECK_THROWS_AS(PairwiseModel({2, 2}, {Role::Sum, Role::Sum}, {{0, 0}, {0, 0}}, {{0, 1}, {1, 0}},
                                  {{0, 0, 0, 0}, {0, 0, 0, 0}}),
                    InvalidArgument);
    CHECK_THROWS_AS(PairwiseModel({2}, {Role::Sum}, {{0, NAN}}, {}, {}), InvalidArgument);
    CHECK_THROWS_AS(PairwiseModel({2}, {Role::Sum}, {{0, INFINITY}}, {}, {}), InvalidArgument);
    CHECK_THROWS_AS(PairwiseModel({2}, {Role::Sum}, {{-INFINITY, -INFINITY}}, {}, {}), InvalidArgument);
    CHECK_THROWS_AS(PairwiseModel({0}, {Role::Sum}, {{}}, {}, {}), InvalidArgument);
    CHECK_THROWS_AS(PairwiseModel({2, 2}, {Role::Sum, Role::Sum}, {{0, 0}, {0, 0}}, {{0, 1}}, {{0, 0, 0}}),
                    InvalidArgument);
  }

  TEST_CASE("cardinality-one variables are constants") {
    PairwiseModel m({1, 2}, {Role::Sum, Role::Max}, {{0.5}, {0, 1}}, {{0, 1}}, {{0.0, 2.0}});
    CHECK(energy(m, {0, 1}) == doctest::Approx(3.5));
  }

  TEST_CASE("partition of the 20-node HMM") {
    const auto p = partition_edges(gen_hmm(20, 1.0, 3));
    CHECK(p.edges_A.size() == 9);
    CHECK(p.edges_B.empty());
    CHECK(p.edges_AB.size() == 10);
  }

  TEST_CASE("partition of all-Sum and single cross edge models") {
    std::mt19937_64 rng(1);
    const auto all_sum = brute::random_model(rng, 6, 3, 0.6, 0.0);
    const auto p = partition_edges(all_sum);
    CHECK(p.edges_B.empty());
    CHECK(p.edges_AB.empty());
    CHECK(p.edges_A.size() == static_cast<std::size_t>(all_sum.num_edges()));
    const auto w = partition_edges(brute::weather());
    CHECK(w.edges_AB == std::vector<int>{0});
  }

  TEST_CASE("edge classes are disjoint and exhaustive on random models") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 30; ++k) {
      const auto m = brute::random_model(rng, 7, 3, 0.5, 0.5);
      const auto p = partition_edges(m);
      std::vector<int> all = p.edges_A;
      all.insert(all.end(), p.edges_B.begin(), p.edges_B.end());
      all.insert(all.end(), p.edges_AB.begin(), p.edges_AB.end());
      std::sort(all.begin(), all.end());
      std::vector<int> expect(m.num_edges());
      for (int e = 0; e < m.num_edges(); ++e) expect[e] = e;
      CHECK(all == expect);
      for (int e : p.edges_A) CHECK((m.is_sum(m.edge(e).u) && m.is_sum(m.edge(e).v)));
      for (int e : p.edges_B) CHECK((m.is_max(m.edge(e).u) && m.is_max(m.edge(e).v)));
      for (int e : p.edges_AB) CHECK(m.is_max(m.edge(e).u) != m.is_max(m.edge(e).v));
    }
  }

  TEST_CASE("A-B tree recognition") {
    const auto w = is_ab_tree(brute::weather());
    CHECK(w.is_ab_tree);
    CHECK(w.order == std::vector<int>{0, 1});
    CHECK(w.parent[1] == 0);
    CHECK_FALSE(is_ab_tree(gen_hmm(20, 1.0, 1)).is_ab_tree);
    std::vector<std::vector<double>> zeros(4, std::vector<double>(4, 0.0));
    PairwiseModel cycle({2, 2, 2, 2}, std::vector<Role>(4, Role::Max), std::vector<std::vector<double>>(4, {0, 0}),
                        {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, zeros);
    CHECK_FALSE(is_ab_tree(cycle).is_ab_tree);
  }

  TEST_CASE("A-B tree chains need a connected Max part above the Sum part") {
    auto chain = [](std::vector<Role> roles) {
      const int n = static_cast<int>(roles.size());
      std::vector<Edge> edges;
      std::vector<std::vector<double>> tables;
      for (int i = 0; i + 1 < n; ++i) {
        edges.push_back({i, i + 1});
        tables.push_back({0, 1, 1, 0});
      }
      return PairwiseModel(std::vector<int>(n, 2), roles, std::vector<std::vector<double>>(n, {0, 0}), edges, tables);
    };
    CHECK(is_ab_tree(chain({Role::Max, Role::Max, Role::Sum, Role::Sum})).is_ab_tree);
    CHECK(is_ab_tree(chain({Role::Sum, Role::Max, Role::Max, Role::Sum, Role::Sum})).is_ab_tree);
    CHECK_FALSE(is_ab_tree(chain({Role::Max, Role::Sum, Role::Max})).is_ab_tree);
    const auto r = is_ab_tree(chain({Role::Sum, Role::Sum, Role::Max}));
    REQUIRE(r.is_ab_tree);
    CHECK(r.order.front() == 2);
  }

  TEST_CASE("energy invariant under edge reordering and endpoint swap") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
      const auto m = brute::random_model(rng, 5, 3, 0.6, 0.5);
      std::vector<Edge> edges = m.edges();
      std::vector<std::vector<double>> tables = m.edge_logpots();
      std::reverse(edges.begin(), edges.end());
      std::reverse(tables.begin(), tables.end());
      for (std::size_t e = 0; e < edges.size(); e += 2) {
        const int cu = m.card(edges[e].u);
        const int cv = m.card(edges[e].v);
        std::vector<double> t(tables[e].size());
        for (int a = 0; a < cu; ++a) {
          for (int b = 0; b < cv; ++b) t[b * cu + a] = tables[e][a * cv + b];
        }
        tables[e] = t;
        std::swap(edges[e].u, edges[e].v);
      }
      const PairwiseModel other(m.cards(), m.roles(), m.node_logpots(), edges, tables);
      brute::enumerate(m.cards(), [&](const std::vector<int>& x) {
        CHECK(energy(other, x) == doctest::Approx(energy(m, x)).epsilon(1e-12));
      });
    }
  }

  TEST_CASE("A-B trees admit single-pass elimination") {
    std::mt19937_64 rng(6);
    int tested = 0;
    for (int k = 0; k < 400 && tested < 30; ++k) {
      const auto m = brute::random_tree(rng, 7, 3, 0.4);
      const auto tree = is_ab_tree(m);
      if (!tree.is_ab_tree || m.max_nodes().empty()) continue;
      ++tested;
      const auto fast = ab_tree_mmap(m, tree);
      const auto slow = brute::mmap(m);
      CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-10));
      CHECK(brute::q(m, fast.config) == doctest::Approx(slow.value).epsilon(1e-10));
    }
    CHECK(tested >= 10);
  }

  TEST_CASE("expand_max_config scatters into Max positions") {
    const auto m = gen_hmm(6, 1.0, 1);
    CHECK(expand_max_config(m, {2, 1, 0}) == FullConfig{0, 2, 0, 1, 0, 0});
  }
}
