#include <doctest.h>

#include <cmath>
#include <random>

#include "brute.hpp"
#include "mixmap/baselines.hpp"
#include "mixmap/errors.hpp"
#include "mixmap/generators.hpp"
#include "mixmap/logmath.hpp"
#include "mixmap/oracle.hpp"

using namespace mixmap;

namespace {

PairwiseModel without_cross_edges(const PairwiseModel& base) {
  std::vector<Edge> edges;
  std::vector<std::vector<double>> tables;
  for (int e = 0; e < base.num_edges(); ++e) {
    if (base.is_max(base.edge(e).u) == base.is_max(base.edge(e).v)) {
      edges.push_back(base.edge(e));
      tables.push_back(base.edge_logpot(e));
    }
  }
  return PairwiseModel(base.cards(), base.roles(), base.node_logpots(), edges, tables);
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("EM on weather from either start") {
    const auto w = brute::weather();
    for (int start : {0, 1}) {
      EmOptions o;
      o.init = MaxConfig{start};
      const auto r = run_em(w, o);
      CHECK(r.decode == MaxConfig{1});
      CHECK(r.runs == 1);
    }
  }

  TEST_CASE("EM on decoupled and Sum-free models") {
    std::mt19937_64 rng(61);
    for (int k = 0; k < 10; ++k) {
      const auto m = without_cross_edges(brute::random_model(rng, 6, 3, 0.6, 0.5));
      if (m.max_nodes().empty()) continue;
      const auto best = brute::mmap(m);
      if (best.value - best.second < 1e-9) continue;
      CHECK(run_em(m, {}).decode == best.config);
    }
    const auto all_max = brute::random_model(rng, 6, 3, 0.6, 1.0);
    CHECK(run_em(all_max, {}).decode == brute::map(all_max).config);
  }

  TEST_CASE("exact EM never decreases Q") {
    std::mt19937_64 rng(62);
    for (int k = 0; k < 30; ++k) {
      const auto m = brute::random_model(rng, 7, 3, 0.5, 0.5);
      if (m.max_nodes().empty()) continue;
      EmOptions o;
      o.init = MaxConfig(m.max_nodes().size(), 0);
      const auto r = run_em(m, o);
      for (std::size_t t = 1; t < r.objective_trace.size(); ++t) {
        CHECK(r.objective_trace[t] >= r.objective_trace[t - 1] - 1e-9);
      }
    }
  }

  TEST_CASE("taboo search on weather and decoupled models") {
    const auto w = brute::weather();
    for (int start : {0, 1}) {
      TabooOptions o;
      o.init = MaxConfig{start};
      o.max_steps = 2;
      CHECK(run_taboo(w, o).decode == MaxConfig{1});
    }
    std::mt19937_64 rng(63);
    PairwiseModel flat({3, 2, 3}, {Role::Max, Role::Sum, Role::Max},
                       {brute::normal_table(rng, 3, 1.0), {0, 0}, brute::normal_table(rng, 3, 1.0)}, {}, {});
    const MaxConfig expect{argmax_lowest(flat.node_logpot(0)), argmax_lowest(flat.node_logpot(2))};
    CHECK(run_taboo(flat, {}).decode == expect);
  }

  TEST_CASE("taboo keeps the best configuration seen") {
    std::mt19937_64 rng(64);
    for (int k = 0; k < 10; ++k) {
      const auto m = brute::random_model(rng, 7, 3, 0.5, 0.5);
      const auto best = brute::mmap(m);
      TabooOptions o;
      o.init = best.config;
      const auto r = run_taboo(m, o);
      REQUIRE(r.q_exact.has_value());
      CHECK(*r.q_exact == doctest::Approx(best.value).epsilon(1e-12));
    }
  }

  TEST_CASE("taboo is complete when steps cover the Max space") {
    std::mt19937_64 rng(65);
    int tested = 0;
    for (int k = 0; k < 40 && tested < 10; ++k) {
      const auto m = brute::random_model(rng, 11, 2, 0.3, 0.7);
      std::uint64_t space = 1;
      for (int c : brute::max_cards(m)) space *= c;
      if (space > 512) continue;
      ++tested;
      TabooOptions o;
      o.max_steps = static_cast<int>(space);
      o.num_random_inits = 0;
      const auto r = run_taboo(m, o);
      CHECK(*r.q_exact == doctest::Approx(brute::mmap(m).value).epsilon(1e-12));
    }
    CHECK(tested == 10);
  }

  TEST_CASE("taboo needs an evaluable Q") {
    const auto grid = gen_grid(6, GridPattern::SumLoopy, 1.0, 1, 3);
    std::vector<Role> roles(grid.num_vars(), Role::Sum);
    roles[0] = Role::Max;
    const auto g = grid.with_roles(roles);
    TabooOptions o;
    o.limits.max_states = 1000;
    CHECK_THROWS_AS(run_taboo(g, o), ResourceLimitError);
  }

  TEST_CASE("sequential initialization") {
    CHECK(default_sequential_init(brute::weather()) == MaxConfig{1});
    std::mt19937_64 rng(66);
    CHECK(default_sequential_init(brute::random_model(rng, 4, 3, 0.6, 0.0)).empty());
    PairwiseModel flat({2, 3, 2}, {Role::Max, Role::Sum, Role::Max}, {{0, 0}, {0, 0, 0}, {0, 0}}, {{0, 1}, {1, 2}},
                       {std::vector<double>(6, 0.0), std::vector<double>(6, 0.0)});
    CHECK(default_sequential_init(flat) == MaxConfig{0, 0});
  }

  TEST_CASE("clamped optima recover Phi_AB") {
    std::mt19937_64 rng(67);
    for (int k = 0; k < 10; ++k) {
      const auto m = brute::random_model(rng, 6, 2, 0.5, 0.5);
      double best = -INFINITY;
      brute::enumerate(brute::max_cards(m), [&](const std::vector<int>& xb) {
        best = std::max(best, dual_objective(m, clamped_distribution(m, xb)));
      });
      CHECK(best == doctest::Approx(brute::mmap(m).value).epsilon(1e-10));
    }
  }
}
