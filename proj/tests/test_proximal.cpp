#include <doctest.h>

#include <cmath>
#include <random>

#include "brute.hpp"
#include "mixmap/errors.hpp"
#include "mixmap/generators.hpp"
#include "mixmap/mp.hpp"
#include "mixmap/oracle.hpp"
#include "mixmap/proximal.hpp"

using namespace mixmap;

namespace {

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) s += p[k] * std::log(p[k] / q[k]);
  }
  return s;
}

// Row-major joint over (x_i, x_j): sum_j p_j KL[t(.|j) || q(.|j)] when `over_first`, else the mirror.
double conditional_kl(const std::vector<double>& t, const std::vector<double>& q, int ci, int cj, bool over_first) {
  const int outer = over_first ? cj : ci;
  const int inner = over_first ? ci : cj;
  auto at = [&](const std::vector<double>& m, int a, int b) { return over_first ? m[a * cj + b] : m[b * cj + a]; };
  double s = 0.0;
  for (int o = 0; o < outer; ++o) {
    double pt = 0.0;
    double pq = 0.0;
    for (int k = 0; k < inner; ++k) {
      pt += at(t, k, o);
      pq += at(q, k, o);
    }
    std::vector<double> ct(inner);
    std::vector<double> cq(inner);
    for (int k = 0; k < inner; ++k) {
      ct[k] = at(t, k, o) / pt;
      cq[k] = at(q, k, o) / pq;
    }
    s += pt * kl(ct, cq);
  }
  return s;
}

}  // namespace

TEST_SUITE("proximal") {
  TEST_CASE("weather with constant and harmonic steps") {
    const auto w = brute::weather();
    for (auto schedule : {LambdaSchedule::Constant, LambdaSchedule::Harmonic}) {
      ProximalOptions o;
      o.lambda = schedule;
      const auto r = run_proximal(w, ProximalFlavor::Bethe, o);
      CHECK(r.decode == MaxConfig{1});
      REQUIRE(r.q_exact.has_value());
      CHECK(*r.q_exact == doctest::Approx(std::log(0.6)).epsilon(1e-12));
      for (std::size_t t = 1; t < r.objective_trace.size(); ++t) {
        CHECK(r.objective_trace[t] >= r.objective_trace[t - 1] - 1e-9);
      }
    }
  }

  TEST_CASE("ascent on trees with a Sum-part forest") {
    // Ascent holds for exact inner solves; a loose tolerance leaves drops of its own order.
    ProximalOptions o;
    o.tol = 1e-11;
    for (int k = 0; k < 20; ++k) {
      const auto m = gen_hmm(8, 0.5 + 0.1 * k, 51 + k);
      const auto r = run_proximal(m, ProximalFlavor::Bethe, o);
      for (std::size_t t = 1; t < r.objective_trace.size(); ++t) {
        CHECK(r.objective_trace[t] >= r.objective_trace[t - 1] - 1e-9);
      }
    }
  }

  TEST_CASE("no Max nodes reduces to one sum-inference solve") {
    std::mt19937_64 rng(52);
    const auto m = brute::random_tree(rng, 5, 3, 0.0);
    const auto r = run_proximal(m, ProximalFlavor::Bethe, {});
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.decode.empty());
    REQUIRE(r.beliefs.has_value());
    const auto ref = brute::marginals(m);
    for (int i = 0; i < m.num_vars(); ++i) {
      for (int x = 0; x < m.card(i); ++x) CHECK(std::abs(r.beliefs->node[i][x] - ref.node[i][x]) < 1e-6);
    }
  }

  TEST_CASE("TRW flavor reports a valid bound") {
    const auto w = brute::weather();
    const auto r = run_proximal(w, ProximalFlavor::Trw, {});
    REQUIRE(r.bound.has_value());
    CHECK(r.bound->valid);
    CHECK(r.bound->value >= std::log(0.6) - 1e-6);

    std::mt19937_64 rng(53);
    for (int k = 0; k < 10; ++k) {
      const auto m = brute::random_model(rng, 6, 2, 0.5, 0.5);
      const auto t = run_proximal(m, ProximalFlavor::Trw, {});
      REQUIRE(t.bound.has_value());
      if (t.bound->valid) CHECK(t.bound->value >= brute::mmap(m).value - 1e-6);
    }
  }

  TEST_CASE("fixed points are mixed-consistent") {
    const auto w = brute::weather();
    const auto r = run_proximal(w, ProximalFlavor::Bethe, {});
    REQUIRE(r.converged);
    CHECK(r.residuals.consistency_a.value_or(0.0) <= 1e-5);
    CHECK(r.residuals.consistency_c.value_or(0.0) <= 1e-5);
  }

  TEST_CASE("proximal distance closed forms") {
    PairwiseModel one({2}, {Role::Max}, {{0, 0}}, {}, {});
    const auto cert = convex_weights_B(one).certificate;
    BeliefSet a{{{1.0, 0.0}}, {}};
    BeliefSet b{{{0.5, 0.5}}, {}};
    CHECK(pairwise_proximal_distance(one, a, a, cert) == 0.0);
    CHECK(pairwise_proximal_distance(one, a, b, cert) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(pairwise_proximal_distance(one, b, a, cert), InvalidArgument);

    std::mt19937_64 rng(54);
    PairwiseModel pair({2, 3}, {Role::Max, Role::Max}, {{0, 0}, {0, 0, 0}}, {{0, 1}}, {{0, 0, 0, 0, 0, 0}});
    const auto c2 = convex_weights_B(pair).certificate;
    auto random_joint = [&] {
      std::uniform_real_distribution<double> u(0.1, 1.0);
      std::vector<double> j(6);
      double s = 0.0;
      for (double& v : j) s += (v = u(rng));
      for (double& v : j) v /= s;
      BeliefSet out;
      out.edge = {j};
      out.node = {{j[0] + j[1] + j[2], j[3] + j[4] + j[5]}, {j[0] + j[3], j[1] + j[4], j[2] + j[5]}};
      return out;
    };
    for (int k = 0; k < 5; ++k) {
      const auto t = random_joint();
      const auto p = random_joint();
      const double expect = 0.5 * kl(t.node[0], p.node[0]) + 0.5 * kl(t.node[1], p.node[1]) +
                            0.5 * conditional_kl(t.edge[0], p.edge[0], 2, 3, true) +
                            0.5 * conditional_kl(t.edge[0], p.edge[0], 2, 3, false);
      CHECK(pairwise_proximal_distance(pair, t, p, c2) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(pairwise_proximal_distance(pair, t, t, c2) == doctest::Approx(0.0));
    }
  }

  TEST_CASE("options are validated") {
    ProximalOptions o;
    o.max_outer = 0;
    CHECK_THROWS_AS(o.validate(), InvalidArgument);
    o = {};
    CHECK(o.lambda_at(4) == doctest::Approx(0.25));
    o.lambda = LambdaSchedule::Constant;
    CHECK(o.lambda_at(4) == 1.0);
  }
}
