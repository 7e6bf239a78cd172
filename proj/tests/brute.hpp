#pragma once

// Brute-force reference computations written independently of the library's
// oracle. Only the model accessors are shared.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "mixmap/model.hpp"

namespace brute {

using mixmap::PairwiseModel;
using mixmap::Role;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Visits every joint state of `vars` (last variable fastest).
inline void enumerate(const std::vector<int>& cards, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> x(cards.size(), 0);
  while (true) {
    f(x);
    int k = static_cast<int>(cards.size()) - 1;
    while (k >= 0 && ++x[k] == cards[k]) x[k--] = 0;
    if (k < 0) return;
  }
}

inline double theta(const PairwiseModel& m, const std::vector<int>& x) {
  double s = 0.0;
  for (int i = 0; i < m.num_vars(); ++i) s += m.node_logpot(i)[x[i]];
  for (int e = 0; e < m.num_edges(); ++e) {
    const auto& ed = m.edge(e);
    s += m.edge_logpot(e)[x[ed.u] * m.card(ed.v) + x[ed.v]];
  }
  return s;
}

/// Accumulates log sum exp without a max pass by rescaling on the fly.
struct Lse {
  double m = kNegInf;
  double s = 0.0;
  void add(double v) {
    if (v == kNegInf) return;
    if (v > m) {
      s = s * std::exp(m - v) + 1.0;
      m = v;
    } else {
      s += std::exp(v - m);
    }
  }
  double value() const { return m == kNegInf ? kNegInf : m + std::log(s); }
};

inline double log_partition(const PairwiseModel& m) {
  Lse acc;
  enumerate(m.cards(), [&](const std::vector<int>& x) { acc.add(theta(m, x)); });
  return acc.value();
}

struct Marg {
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> edge;
};

inline Marg marginals(const PairwiseModel& m) {
  const double z = log_partition(m);
  Marg out;
  for (int i = 0; i < m.num_vars(); ++i) out.node.emplace_back(m.card(i), 0.0);
  for (int e = 0; e < m.num_edges(); ++e) {
    out.edge.emplace_back(static_cast<std::size_t>(m.card(m.edge(e).u)) * m.card(m.edge(e).v), 0.0);
  }
  enumerate(m.cards(), [&](const std::vector<int>& x) {
    const double p = std::exp(theta(m, x) - z);
    for (int i = 0; i < m.num_vars(); ++i) out.node[i][x[i]] += p;
    for (int e = 0; e < m.num_edges(); ++e) out.edge[e][x[m.edge(e).u] * m.card(m.edge(e).v) + x[m.edge(e).v]] += p;
  });
  return out;
}

/// Q(x_B) with x_B aligned to the increasing list of Max nodes.
inline double q(const PairwiseModel& m, const std::vector<int>& xb) {
  std::vector<int> sum_vars;
  std::vector<int> full(m.num_vars(), 0);
  std::size_t k = 0;
  for (int i = 0; i < m.num_vars(); ++i) {
    if (m.role(i) == Role::Max) {
      full[i] = xb[k++];
    } else {
      sum_vars.push_back(i);
    }
  }
  std::vector<int> cards;
  for (int i : sum_vars) cards.push_back(m.card(i));
  Lse acc;
  enumerate(cards, [&](const std::vector<int>& xa) {
    for (std::size_t t = 0; t < sum_vars.size(); ++t) full[sum_vars[t]] = xa[t];
    acc.add(theta(m, full));
  });
  return acc.value();
}

inline std::vector<int> max_cards(const PairwiseModel& m) {
  std::vector<int> c;
  for (int i = 0; i < m.num_vars(); ++i) {
    if (m.role(i) == Role::Max) c.push_back(m.card(i));
  }
  return c;
}

struct Best {
  std::vector<int> config;
  double value = kNegInf;
  double second = kNegInf;
};

inline Best mmap(const PairwiseModel& m) {
  Best b;
  enumerate(max_cards(m), [&](const std::vector<int>& xb) {
    const double v = q(m, xb);
    if (v > b.value) {
      b.second = b.value;
      b.value = v;
      b.config = xb;
    } else if (v > b.second) {
      b.second = v;
    }
  });
  return b;
}

inline Best map(const PairwiseModel& m) {
  Best b;
  enumerate(m.cards(), [&](const std::vector<int>& x) {
    const double v = theta(m, x);
    if (v > b.value) {
      b.second = b.value;
      b.value = v;
      b.config = x;
    } else if (v > b.second) {
      b.second = v;
    }
  });
  return b;
}

inline std::vector<double> normal_table(std::mt19937_64& rng, std::size_t n, double sd) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> t(n);
  for (double& v : t) v = d(rng);
  return t;
}

/// Random model: uniform card in [2, max_card], each pair joined with prob p,
/// roles Max with prob pmax.
inline PairwiseModel random_model(std::mt19937_64& rng, int n, int max_card, double p, double pmax,
                                  double sigma = 1.0) {
  std::uniform_int_distribution<int> cd(2, max_card);
  std::bernoulli_distribution edge(p);
  std::bernoulli_distribution is_max(pmax);
  std::vector<int> cards(n);
  std::vector<Role> roles(n);
  for (int i = 0; i < n; ++i) {
    cards[i] = cd(rng);
    roles[i] = is_max(rng) ? Role::Max : Role::Sum;
  }
  std::vector<mixmap::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (edge(rng)) edges.push_back({i, j});
    }
  }
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> pair;
  for (int i = 0; i < n; ++i) node.push_back(normal_table(rng, cards[i], 0.5));
  for (const auto& e : edges) pair.push_back(normal_table(rng, static_cast<std::size_t>(cards[e.u]) * cards[e.v], sigma));
  return PairwiseModel(cards, roles, node, edges, pair);
}

/// Random tree: node i > 0 attaches to a uniform earlier node.
inline PairwiseModel random_tree(std::mt19937_64& rng, int n, int max_card, double pmax, double sigma = 1.0) {
  std::uniform_int_distribution<int> cd(2, max_card);
  std::bernoulli_distribution is_max(pmax);
  std::vector<int> cards(n);
  std::vector<Role> roles(n);
  for (int i = 0; i < n; ++i) {
    cards[i] = cd(rng);
    roles[i] = is_max(rng) ? Role::Max : Role::Sum;
  }
  std::vector<mixmap::Edge> edges;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> par(0, i - 1);
    edges.push_back({par(rng), i});
  }
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> pair;
  for (int i = 0; i < n; ++i) node.push_back(normal_table(rng, cards[i], 0.5));
  for (const auto& e : edges) pair.push_back(normal_table(rng, static_cast<std::size_t>(cards[e.u]) * cards[e.v], sigma));
  return PairwiseModel(cards, roles, node, edges, pair);
}

/// x_b (node 0, Max): rainy = 0, sunny = 1. x_a (node 1, Sum): walk = 0, drive = 1.
inline PairwiseModel weather() {
  return PairwiseModel({2, 2}, {Role::Max, Role::Sum}, {{std::log(0.4), std::log(0.6)}, {0.0, 0.0}}, {{0, 1}},
                       {{std::log(1.0 / 8), std::log(7.0 / 8), std::log(0.5), std::log(0.5)}});
}

}  // namespace brute
