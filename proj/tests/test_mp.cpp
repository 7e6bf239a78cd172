#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>

#include "brute.hpp"
#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"
#include "mixmap/messages.hpp"
#include "mixmap/mp.hpp"
#include "mixmap/oracle.hpp"

using namespace mixmap;

namespace {

std::vector<double> ones(const PairwiseModel& m) { return std::vector<double>(m.num_edges(), 1.0); }

SolverOptions quiet() {
  SolverOptions o;
  o.record_trace = false;
  return o;
}

// Chain x3 - x1 - x2 - x4 with A = {x1, x2} at ids 0, 1 and B = {x3, x4} at ids 2, 3.
PairwiseModel toy_tree(std::mt19937_64& rng, int card, double sigma) {
  const std::vector<int> cards(4, card);
  std::vector<std::vector<double>> unary;
  for (int i = 0; i < 4; ++i) unary.push_back(brute::normal_table(rng, card, 0.1));
  std::vector<std::vector<double>> tables;
  for (int e = 0; e < 3; ++e) tables.push_back(brute::normal_table(rng, card * card, sigma));
  return PairwiseModel(cards, {Role::Sum, Role::Sum, Role::Max, Role::Max}, unary, {{2, 0}, {0, 1}, {1, 3}}, tables);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

std::vector<double> normalized(std::vector<double> p) {
  double s = 0.0;
  for (double v : p) s += v;
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

TEST_SUITE("mp") {
  TEST_CASE("weighted update reduces to sum-product") {
    PairwiseModel m({2, 2}, {Role::Sum, Role::Sum}, {{0, 0}, {0, 0}}, {{0, 1}},
                    {{std::log(3.0), 0.0, 0.0, std::log(2.0)}});
    const auto msgs = uniform_messages(m);
    const auto out = weighted_update(m, bethe_weights(m, 1.0), msgs, 0);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == doctest::Approx(std::log(0.75)));

    std::mt19937_64 rng(31);
    const auto r = brute::random_model(rng, 6, 3, 0.6, 0.0);
    const auto rm = random_messages(r, rng);
    const auto w = bethe_weights(r, 1.0);
    for (int d = 0; d < r.num_directed(); ++d) {
      const int i = r.source(d);
      const int j = r.target(d);
      std::vector<double> ref(r.card(j), kNegInf);
      for (int xi = 0; xi < r.card(i); ++xi) {
        double cavity = r.node_logpot(i)[xi];
        for (const auto& inc : r.neighbors(i)) {
          if (inc.in != PairwiseModel::reverse(d)) cavity += rm.m[inc.in][xi];
        }
        for (int xj = 0; xj < r.card(j); ++xj) {
          ref[xj] = log_add(ref[xj], cavity + r.directed_table(d)[static_cast<std::size_t>(xi) * r.card(j) + xj]);
        }
      }
      max_normalize(ref);
      CHECK(max_abs_diff(weighted_update(r, w, rm, d), ref) < 1e-12);
    }
  }

  TEST_CASE("symmetric model gives symmetric messages") {
    PairwiseModel m({2, 2}, {Role::Sum, Role::Sum}, {{0.3, -0.2}, {0.3, -0.2}}, {{0, 1}}, {{1.0, 0.2, 0.2, 0.5}});
    const auto msgs = uniform_messages(m);
    const auto w = bethe_weights(m, 1.0);
    CHECK(max_abs_diff(weighted_update(m, w, msgs, 0), weighted_update(m, w, msgs, 1)) < 1e-15);
  }

  TEST_CASE("weighted update rejects zero weights") {
    const auto w = brute::weather();
    CHECK_THROWS_AS(weighted_update(w, bethe_weights(w, 0.0), uniform_messages(w), 0), InvalidArgument);
  }

  TEST_CASE("generic BP is exact on trees") {
    std::mt19937_64 rng(32);
    for (int k = 0; k < 20; ++k) {
      const auto m = brute::random_tree(rng, 7, 3, 0.0);
      const auto g = run_generic(m, bethe_weights(m, 1.0), quiet());
      CHECK(g.report.converged);
      const auto ref = brute::marginals(m);
      for (int i = 0; i < m.num_vars(); ++i) CHECK(max_abs_diff(g.beliefs.node[i], ref.node[i]) < 1e-8);
    }
    const auto w = brute::weather();
    const auto g = run_generic(w, bethe_weights(w, 1.0), quiet());
    CHECK(g.beliefs.node[0][0] == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(g.beliefs.node[0][1] == doctest::Approx(0.6).epsilon(1e-10));

    PairwiseModel two({3, 2}, {Role::Sum, Role::Sum}, {{0.0, 1.0, 2.0}, {-1.0, 1.0}}, {}, {});
    const auto gt = run_generic(two, bethe_weights(two, 1.0), quiet());
    const auto soft = normalized({1.0, std::exp(1.0), std::exp(2.0)});
    CHECK(max_abs_diff(gt.beliefs.node[0], soft) < 1e-12);
  }

  TEST_CASE("annealed BP") {
    const auto w = brute::weather();
    CHECK(run_annealed(w, ones(w), quiet()).decode == MaxConfig{1});

    std::mt19937_64 rng(33);
    int tested = 0;
    for (int k = 0; k < 20; ++k) {
      const auto t = brute::random_tree(rng, 5, 3, 1.0);
      const auto best = brute::mmap(t);
      if (best.value - best.second < 1e-3) continue;
      ++tested;
      CHECK(run_annealed(t, ones(t), quiet()).decode == best.config);
    }
    CHECK(tested >= 10);

    const auto all_sum = brute::random_tree(rng, 5, 3, 0.0);
    const auto r = run_annealed(all_sum, ones(all_sum), quiet());
    CHECK(r.decode.empty());
    REQUIRE(r.beliefs.has_value());
    const auto ref = brute::marginals(all_sum);
    for (int i = 0; i < all_sum.num_vars(); ++i) CHECK(max_abs_diff(r.beliefs->node[i], ref.node[i]) < 1e-6);
  }

  TEST_CASE("argmax-product and max-product cross messages on weather") {
    const auto w = brute::weather();
    auto msgs = uniform_messages(w);
    msgs.m[1] = mixed_update(w, ones(w), msgs, 1);
    CHECK(max_abs_diff(msgs.m[1], {0.0, 0.0}) < 1e-12);
    const auto argmax_msg = mixed_update(w, ones(w), msgs, 0, CrossRule::ArgmaxProduct);
    CHECK(max_abs_diff(argmax_msg, {0.0, 0.0}) < 1e-12);
    const auto max_msg = mixed_update(w, ones(w), msgs, 0, CrossRule::MaxProduct);
    CHECK(max_abs_diff(max_msg, {std::log(0.3 / 0.35), 0.0}) < 1e-12);
  }

  TEST_CASE("B to B update at unit rho is max-product") {
    std::mt19937_64 rng(34);
    const auto m = brute::random_model(rng, 6, 3, 0.6, 1.0);
    const auto msgs = random_messages(m, rng);
    for (int d = 0; d < m.num_directed(); ++d) {
      CHECK(max_abs_diff(mixed_update(m, ones(m), msgs, d), max_product_update(m, msgs, d)) < 1e-12);
    }
  }

  TEST_CASE("tied Max beliefs keep every maximizer") {
    PairwiseModel m({2, 2}, {Role::Max, Role::Sum}, {{0, 0}, {0, 0}}, {{0, 1}}, {{1.0, 0.0, 0.0, 2.0}});
    const auto msgs = uniform_messages(m);
    const auto out = mixed_update(m, ones(m), msgs, 0);
    std::vector<double> ref{log_add(1.0, 0.0), log_add(0.0, 2.0)};
    max_normalize(ref);
    CHECK(max_abs_diff(out, ref) < 1e-12);
  }

  TEST_CASE("mixed-product on weather and pure-Max chains") {
    const auto w = brute::weather();
    const auto r = run_mixed_product(w, ones(w), quiet());
    CHECK(r.decode == MaxConfig{1});
    CHECK(r.converged);
    REQUIRE(r.residuals.reparam.has_value());
    CHECK(*r.residuals.reparam <= 1e-6);

    std::mt19937_64 rng(35);
    for (int k = 0; k < 10; ++k) {
      const auto chain = brute::random_tree(rng, 6, 3, 1.0);
      CHECK(run_mixed_product(chain, ones(chain), quiet()).decode == run_max_product(chain, quiet()).decode);
    }
  }

  TEST_CASE("the true solution is a mixed-product fixed point on the toy tree") {
    std::mt19937_64 rng(36);
    int tested = 0;
    for (int k = 0; k < 40; ++k) {
      const auto m = toy_tree(rng, 3, 1.0);
      const auto best = brute::mmap(m);
      if (best.value - best.second < 1e-6) continue;
      ++tested;
      // Seed the Max beliefs at x*, then pass 3->1, 4->2, 1->2, 2->1, 1->3, 2->4.
      auto msgs = uniform_messages(m);
      for (int d : {1, 4}) {
        const int target_pos = m.max_position(m.target(d));
        for (int s = 0; s < m.card(m.target(d)); ++s) msgs.m[d][s] = s == best.config[target_pos] ? 0.0 : -50.0;
      }
      for (int d : {0, 5, 2, 3, 1, 4}) msgs.m[d] = mixed_update(m, ones(m), msgs, d);
      CHECK(decode_max_nodes(m, msgs) == best.config);
      auto opts = quiet();
      const auto st = run_mixed_from(m, ones(m), opts, msgs);
      CHECK(st.converged);
      CHECK(st.iterations <= 2);
      CHECK(decode_max_nodes(m, st.msgs) == best.config);
    }
    CHECK(tested >= 20);
  }

  TEST_CASE("hybrid BP solves the reordered objective on the toy tree") {
    std::mt19937_64 rng(37);
    for (int k = 0; k < 20; ++k) {
      const auto m = toy_tree(rng, 3, 1.0);
      // x3 = argmax sum_{x1,x2} max_{x4}; x4 = argmax sum_{x2,x1} max_{x3}.
      auto reordered = [&](int keep, int other) {
        std::vector<double> score(3, kNegInf);
        for (int xk = 0; xk < 3; ++xk) {
          for (int x1 = 0; x1 < 3; ++x1) {
            for (int x2 = 0; x2 < 3; ++x2) {
              double inner = kNegInf;
              for (int xo = 0; xo < 3; ++xo) {
                std::vector<int> x{x1, x2, 0, 0};
                x[keep] = xk;
                x[other] = xo;
                inner = std::max(inner, energy(m, x));
              }
              score[xk] = log_add(score[xk], inner);
            }
          }
        }
        return score;
      };
      const auto s3 = reordered(2, 3);
      const auto s4 = reordered(3, 2);
      auto sorted3 = s3;
      std::sort(sorted3.begin(), sorted3.end());
      auto sorted4 = s4;
      std::sort(sorted4.begin(), sorted4.end());
      if (sorted3[2] - sorted3[1] < 1e-6 || sorted4[2] - sorted4[1] < 1e-6) continue;
      const auto r = run_jiang(m, ones(m), quiet());
      CHECK(r.decode[0] == argmax_lowest(s3));
      CHECK(r.decode[1] == argmax_lowest(s4));
    }
  }

  TEST_CASE("hybrid and mixed agree when Sum and Max parts are decoupled") {
    std::mt19937_64 rng(38);
    for (int k = 0; k < 10; ++k) {
      const auto base = brute::random_model(rng, 6, 3, 0.6, 0.5);
      std::vector<Edge> edges;
      std::vector<std::vector<double>> tables;
      for (int e = 0; e < base.num_edges(); ++e) {
        if (base.is_max(base.edge(e).u) == base.is_max(base.edge(e).v)) {
          edges.push_back(base.edge(e));
          tables.push_back(base.edge_logpot(e));
        }
      }
      const PairwiseModel m(base.cards(), base.roles(), base.node_logpots(), edges, tables);
      CHECK(run_jiang(m, ones(m), quiet()).decode == run_mixed_product(m, ones(m), quiet()).decode);
    }
    const auto w = brute::weather();
    CHECK(run_jiang(w, ones(w), quiet()).decode == MaxConfig{1});
  }

  TEST_CASE("sum-product and max-product on weather") {
    const auto w = brute::weather();
    CHECK(run_sum_product(w, quiet()).decode == MaxConfig{1});
    CHECK(run_max_product(w, quiet()).decode == MaxConfig{0});
  }

  TEST_CASE("max-product finds the MAP on trees") {
    std::mt19937_64 rng(39);
    int tested = 0;
    for (int k = 0; k < 30; ++k) {
      const auto t = brute::random_tree(rng, 7, 3, 1.0);
      const auto best = brute::map(t);
      if (best.value - best.second < 1e-6) continue;
      ++tested;
      CHECK(run_max_product(t, quiet()).decode == best.config);
    }
    CHECK(tested >= 20);
  }

  TEST_CASE("reparameterization residual") {
    std::mt19937_64 rng(40);
    const auto t = brute::random_tree(rng, 6, 3, 0.0);
    const auto exact = marginals_exact(t);
    CHECK(check_reparameterization(t, ones(t), exact) <= 1e-8);
    CHECK(check_reparameterization(t, ones(t), perturb_beliefs(exact)) >= std::log(2.0) - 1e-6);

    auto zero = exact;
    zero.node[0].assign(zero.node[0].size(), 0.0);
    CHECK_THROWS_AS(check_reparameterization(t, ones(t), zero), StructuralViolation);
  }

  TEST_CASE("mixed consistency residuals") {
    const auto w = brute::weather();
    const auto r = run_mixed_product(w, ones(w), quiet());
    CHECK(r.residuals.consistency_a.value_or(0.0) <= 1e-6);
    CHECK(r.residuals.consistency_b.value_or(0.0) <= 1e-6);
    CHECK(r.residuals.consistency_c.value_or(0.0) <= 1e-6);

    std::mt19937_64 rng(41);
    const auto sum_tree = brute::random_tree(rng, 6, 3, 0.0);
    const auto sp = run_sum_product(sum_tree, quiet());
    REQUIRE(sp.residuals.consistency_a.has_value());
    CHECK(*sp.residuals.consistency_a <= 1e-8);
    CHECK_FALSE(sp.residuals.consistency_b.has_value());
    CHECK_FALSE(sp.residuals.consistency_c.has_value());

    const auto max_tree = brute::random_tree(rng, 6, 3, 1.0);
    const auto mp = run_max_product(max_tree, quiet());
    REQUIRE(mp.residuals.consistency_b.has_value());
    CHECK(*mp.residuals.consistency_b <= 1e-8);
    CHECK_FALSE(mp.residuals.consistency_a.has_value());
  }

  TEST_CASE("local optimality") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 10; ++k) {
      const auto m = brute::random_model(rng, 7, 2, 0.5, 0.5);
      if (m.max_nodes().empty()) continue;
      const auto best = brute::mmap(m);
      std::vector<std::vector<int>> subsets{m.max_nodes()};
      for (int i : m.max_nodes()) subsets.push_back({i});
      for (bool ok : verify_local_optimality(m, best.config, subsets)) CHECK(ok);
    }
    const auto w = brute::weather();
    CHECK(verify_local_optimality(w, {0}, {{0}}) == std::vector<bool>{false});
    CHECK(verify_local_optimality(w, {1}, {{0}}) == std::vector<bool>{true});
  }

  TEST_CASE("zero-temperature limit of the weighted update") {
    std::mt19937_64 rng(43);
    for (int k = 0; k < 10; ++k) {
      const auto m = brute::random_model(rng, 6, 3, 0.6, 0.5);
      const auto msgs = random_messages(m, rng);
      double prev = INFINITY;
      for (double eps : {1e-2, 1e-3, 1e-4}) {
        const auto w = bethe_weights(m, eps);
        double dev = 0.0;
        for (int d = 0; d < m.num_directed(); ++d) {
          dev = std::max(dev, max_abs_diff(weighted_update(m, w, msgs, d), mixed_update(m, ones(m), msgs, d)));
        }
        CHECK(dev <= prev + 1e-10);
        prev = dev;
      }
      CHECK(prev <= 1e-2);
    }
  }

  TEST_CASE("mixed beliefs are tempered weighted beliefs") {
    std::mt19937_64 rng(44);
    const auto m = brute::random_model(rng, 6, 3, 0.6, 0.5);
    const auto msgs = random_messages(m, rng);
    const double eps = 0.3;
    const auto tau = weighted_beliefs(m, bethe_weights(m, eps), msgs);
    const auto b = mixed_beliefs(m, ones(m), msgs);
    for (int i = 0; i < m.num_vars(); ++i) {
      std::vector<double> ref = tau.node[i];
      if (m.is_max(i)) {
        for (double& p : ref) p = std::pow(p, eps);
      }
      CHECK(max_abs_diff(normalized(ref), b.node[i]) < 1e-9);
    }
  }

  TEST_CASE("decodes are invariant to constant potential shifts") {
    std::mt19937_64 rng(45);
    for (int k = 0; k < 10; ++k) {
      const auto m = brute::random_model(rng, 6, 3, 0.6, 0.5);
      auto unary = m.node_logpots();
      for (auto& t : unary) {
        for (double& v : t) v += 2.5;
      }
      const auto shifted = m.with_node_potentials(unary);
      CHECK(run_mixed_product(m, ones(m), quiet()).decode == run_mixed_product(shifted, ones(m), quiet()).decode);
      CHECK(run_max_product(m, quiet()).decode == run_max_product(shifted, quiet()).decode);
    }
  }

  TEST_CASE("mixed-product solves A-B trees") {
    std::mt19937_64 rng(46);
    int tested = 0;
    int solved = 0;
    for (int k = 0; k < 2000 && tested < 100; ++k) {
      const auto m = brute::random_tree(rng, 7, 3, 0.4);
      if (m.max_nodes().empty() || !is_ab_tree(m).is_ab_tree) continue;
      const auto best = brute::mmap(m);
      if (best.value - best.second < 1e-6) continue;
      ++tested;
      solved += run_mixed_product(m, ones(m), quiet()).decode == best.config;
    }
    CHECK(tested == 100);
    CHECK(solved >= 95);
  }

  TEST_CASE("solver options are validated") {
    SolverOptions o;
    o.damping = 1.0;
    CHECK_THROWS_AS(o.validate(), InvalidArgument);
    o = {};
    o.tol = 0.0;
    CHECK_THROWS_AS(o.validate(), InvalidArgument);
  }
}
