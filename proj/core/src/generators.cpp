#include "mixmap/generators.hpp"

#include <limits>
#include <random>

#include "mixmap/errors.hpp"

namespace mixmap {

namespace {

constexpr double kNodeStd = 0.1;

struct Draws {
  std::mt19937_64 rng;
  double sigma;

  std::vector<double> table(std::size_t size, double stddev) {
    std::vector<double> t(size, 0.0);
    if (stddev == 0.0) return t;
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : t) v = dist(rng);
    return t;
  }
};

PairwiseModel assemble(std::vector<int> cards, std::vector<Role> roles, std::vector<Edge> edges, Draws& draws) {
  std::vector<std::vector<double>> node;
  for (int c : cards) node.push_back(draws.table(static_cast<std::size_t>(c), kNodeStd));
  std::vector<std::vector<double>> pair;
  for (const auto& e : edges) {
    pair.push_back(draws.table(static_cast<std::size_t>(cards[e.u]) * cards[e.v], draws.sigma));
  }
  return PairwiseModel(std::move(cards), std::move(roles), std::move(node), std::move(edges), std::move(pair));
}

void check_sigma(double sigma) {
  if (!(sigma >= 0.0) || sigma == std::numeric_limits<double>::infinity()) {
    throw InvalidArgument("sigma must be finite and nonnegative");
  }
}

}  // namespace

PairwiseModel gen_hmm(int n, double sigma, std::uint64_t seed) {
  if (n <= 0 || n % 2 != 0) throw InvalidArgument("hmm size must be even and positive");
  check_sigma(sigma);
  std::vector<Role> roles(n);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) roles[i] = i % 2 == 0 ? Role::Sum : Role::Max;
  for (int k = 0; k + 1 < n / 2; ++k) edges.push_back({2 * k, 2 * k + 2});
  for (int k = 0; k < n / 2; ++k) edges.push_back({2 * k, 2 * k + 1});
  Draws draws{std::mt19937_64(seed), sigma};
  return assemble(std::vector<int>(n, 3), std::move(roles), std::move(edges), draws);
}

PairwiseModel gen_latent_tree(int n, double sigma, std::uint64_t seed, int card, int max_leaves) {
  if (n < 3) throw InvalidArgument("latent tree needs at least 3 nodes");
  if (card < 1) throw InvalidArgument("cardinality must be positive");
  check_sigma(sigma);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) w[i * n + j] = w[j * n + i] = unif(rng);
  }
  // Prim from node 0.
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<int> link(n, -1);
  std::vector<Edge> edges;
  best[0] = 0.0;
  for (int step = 0; step < n; ++step) {
    int u = -1;
    for (int v = 0; v < n; ++v) {
      if (!in_tree[v] && (u < 0 || best[v] < best[u])) u = v;
    }
    in_tree[u] = true;
    if (link[u] >= 0) edges.push_back({std::min(u, link[u]), std::max(u, link[u])});
    for (int v = 0; v < n; ++v) {
      if (!in_tree[v] && w[u * n + v] < best[v]) {
        best[v] = w[u * n + v];
        link[v] = u;
      }
    }
  }
  std::vector<int> degree(n, 0);
  for (const auto& e : edges) {
    ++degree[e.u];
    ++degree[e.v];
  }
  std::vector<Role> roles(n, Role::Sum);
  int leaves = 0;
  for (int i = 0; i < n; ++i) {
    if (degree[i] == 1 && (max_leaves < 0 || leaves < max_leaves)) {
      roles[i] = Role::Max;
      ++leaves;
    }
  }
  Draws draws{std::move(rng), sigma};
  return assemble(std::vector<int>(n, card), std::move(roles), std::move(edges), draws);
}

PairwiseModel gen_grid(int side, GridPattern pattern, double sigma, std::uint64_t seed, int card) {
  if (side < 2) throw InvalidArgument("grid side must be at least 2");
  if (card < 1) throw InvalidArgument("cardinality must be positive");
  check_sigma(sigma);
  const int n = side * side;
  std::vector<Role> roles(n);
  std::vector<Edge> edges;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const bool even = (r + c) % 2 == 0;
      const bool sum = pattern == GridPattern::SumLoopy ? even : !even;
      roles[r * side + c] = sum ? Role::Sum : Role::Max;
      if (c + 1 < side) edges.push_back({r * side + c, r * side + c + 1});
      if (r + 1 < side) edges.push_back({r * side + c, (r + 1) * side + c});
    }
  }
  Draws draws{std::mt19937_64(seed), sigma};
  return assemble(std::vector<int>(n, card), std::move(roles), std::move(edges), draws);
}

}  // namespace mixmap
