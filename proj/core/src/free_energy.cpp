#include "mixmap/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"

namespace mixmap {

double local_consistency_residual(const PairwiseModel& model, const BeliefSet& beliefs) {
  double r = 0.0;
  for (int i = 0; i < model.num_vars(); ++i) {
    const auto& t = beliefs.node[i];
    r = std::max(r, std::abs(std::accumulate(t.begin(), t.end(), 0.0) - 1.0));
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    const int cu = model.card(u);
    const int cv = model.card(v);
    const auto& t = beliefs.edge[e];
    r = std::max(r, std::abs(std::accumulate(t.begin(), t.end(), 0.0) - 1.0));
    for (int a = 0; a < cu; ++a) {
      double s = 0.0;
      for (int b = 0; b < cv; ++b) s += t[static_cast<std::size_t>(a) * cv + b];
      r = std::max(r, std::abs(s - beliefs.node[u][a]));
    }
    for (int b = 0; b < cv; ++b) {
      double s = 0.0;
      for (int a = 0; a < cu; ++a) s += t[static_cast<std::size_t>(a) * cv + b];
      r = std::max(r, std::abs(s - beliefs.node[v][b]));
    }
  }
  return r;
}

BeliefSet point_mass_beliefs(const PairwiseModel& model, const FullConfig& x) {
  BeliefSet b;
  for (int i = 0; i < model.num_vars(); ++i) {
    b.node.emplace_back(model.card(i), 0.0);
    b.node[i][x[i]] = 1.0;
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    b.edge.emplace_back(static_cast<std::size_t>(model.card(u)) * model.card(v), 0.0);
    b.edge[e][static_cast<std::size_t>(x[u]) * model.card(v) + x[v]] = 1.0;
  }
  return b;
}

BeliefSet uniform_beliefs(const PairwiseModel& model) {
  BeliefSet b;
  for (int i = 0; i < model.num_vars(); ++i) b.node.emplace_back(model.card(i), 1.0 / model.card(i));
  for (int e = 0; e < model.num_edges(); ++e) {
    const std::size_t n = static_cast<std::size_t>(model.card(model.edge(e).u)) * model.card(model.edge(e).v);
    b.edge.emplace_back(n, 1.0 / static_cast<double>(n));
  }
  return b;
}

EntropyWeights::EntropyWeights(const PairwiseModel& model, std::vector<double> rho, double epsilon)
    : rho_(std::move(rho)), epsilon_(epsilon) {
  if (rho_.size() != static_cast<std::size_t>(model.num_edges())) {
    throw InvalidArgument("rho must have one entry per edge");
  }
  if (epsilon < 0.0) throw InvalidArgument("epsilon must be nonnegative");
  for (double r : rho_) {
    if (!(r >= 0.0)) throw InvalidArgument("rho must be nonnegative");
  }
  is_max_.resize(model.num_vars());
  for (int i = 0; i < model.num_vars(); ++i) is_max_[i] = model.is_max(i);
  edge_in_B_.resize(model.num_edges());
  for (int e = 0; e < model.num_edges(); ++e) {
    edge_in_B_[e] = model.is_max(model.edge(e).u) && model.is_max(model.edge(e).v);
  }
}

EntropyWeights EntropyWeights::with_epsilon(double epsilon) const {
  if (epsilon < 0.0) throw InvalidArgument("epsilon must be nonnegative");
  EntropyWeights w = *this;
  w.epsilon_ = epsilon;
  return w;
}

EntropyWeights bethe_weights(const PairwiseModel& model, double epsilon) {
  return EntropyWeights(model, std::vector<double>(model.num_edges(), 1.0), epsilon);
}

ConvexWeightsB convex_weights_B(const PairwiseModel& model) {
  ConvexWeightsB out;
  out.rho.assign(model.num_edges(), 0.0);
  out.certificate.kappa_dir.assign(model.num_directed(), 0.0);
  for (int i : model.max_nodes()) {
    int deg = 0;
    for (const auto& inc : model.neighbors(i)) deg += model.is_max(inc.neighbor) ? 1 : 0;
    if (deg == 0) {
      out.certificate.kappa_node.push_back(1.0);
      continue;
    }
    out.certificate.kappa_node.push_back(0.5);
    // Node i's budget pays for the incoming directions i' -> i.
    for (const auto& inc : model.neighbors(i)) {
      if (model.is_max(inc.neighbor)) out.certificate.kappa_dir[inc.in] = 0.5 / deg;
    }
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    if (model.is_max(model.edge(e).u) && model.is_max(model.edge(e).v)) {
      out.rho[e] = out.certificate.kappa_dir[2 * e] + out.certificate.kappa_dir[2 * e + 1];
    }
  }
  return out;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

struct SumComponents {
  std::vector<int> edges_A;
  /// Cross edges incident to each component of G_A, in edge order.
  std::vector<std::vector<int>> cross;
};

SumComponents sum_components(const PairwiseModel& model) {
  SumComponents c;
  DisjointSets ds(model.num_vars());
  std::vector<int> cross_edges;
  for (int e = 0; e < model.num_edges(); ++e) {
    const bool mu = model.is_max(model.edge(e).u);
    const bool mv = model.is_max(model.edge(e).v);
    if (!mu && !mv) {
      c.edges_A.push_back(e);
      ds.unite(model.edge(e).u, model.edge(e).v);
    } else if (mu != mv) {
      cross_edges.push_back(e);
    }
  }
  std::vector<int> id(model.num_vars(), -1);
  int count = 0;
  for (int i : model.sum_nodes()) {
    const int r = ds.find(i);
    if (id[r] < 0) id[r] = count++;
  }
  c.cross.resize(count);
  for (int e : cross_edges) {
    const int s = model.is_max(model.edge(e).u) ? model.edge(e).v : model.edge(e).u;
    c.cross[id[ds.find(s)]].push_back(e);
  }
  return c;
}

std::vector<std::vector<int>> sample_trees(const PairwiseModel& model, int num_trees,
                                           std::uint64_t seed) {
  const SumComponents comps = sum_components(model);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> perm = comps.cross;
  for (auto& p : perm) std::shuffle(p.begin(), p.end(), rng);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<int>> trees;
  for (int t = 0; t < num_trees; ++t) {
    std::vector<std::pair<double, int>> keyed;
    for (int e : comps.edges_A) keyed.push_back({unif(rng), e});
    std::sort(keyed.begin(), keyed.end());
    DisjointSets ds(model.num_vars());
    std::vector<int> tree;
    for (const auto& [key, e] : keyed) {
      if (ds.unite(model.edge(e).u, model.edge(e).v)) tree.push_back(e);
    }
    for (const auto& p : perm) {
      if (!p.empty()) tree.push_back(p[static_cast<std::size_t>(t) % p.size()]);
    }
    std::sort(tree.begin(), tree.end());
    trees.push_back(std::move(tree));
  }
  return trees;
}

EntropyWeights weights_from_trees(const PairwiseModel& model, std::vector<std::vector<int>> trees,
                                  double epsilon) {
  std::vector<double> rho(model.num_edges(), 0.0);
  for (const auto& tree : trees) {
    for (int e : tree) rho[e] += 1.0;
  }
  for (double& r : rho) r /= static_cast<double>(trees.size());
  ConvexWeightsB b = convex_weights_B(model);
  for (int e = 0; e < model.num_edges(); ++e) {
    if (model.is_max(model.edge(e).u) && model.is_max(model.edge(e).v)) rho[e] = b.rho[e];
  }
  EntropyWeights w(model, std::move(rho), epsilon);
  w.trees = std::move(trees);
  w.certificate = std::move(b.certificate);
  return w;
}

}  // namespace

int min_covering_tree_count(const PairwiseModel& model) {
  std::size_t m = 1;
  for (const auto& c : sum_components(model).cross) m = std::max(m, c.size());
  return static_cast<int>(m);
}

EntropyWeights trw_weights(const PairwiseModel& model, int num_trees, std::uint64_t seed,
                           double epsilon) {
  if (num_trees <= 0) throw InvalidArgument("num_trees must be positive");
  return weights_from_trees(model, sample_trees(model, num_trees, seed), epsilon);
}

EntropyWeights trw_weights_covering(const PairwiseModel& model, std::uint64_t seed, double epsilon,
                                    int max_trees) {
  const int base = min_covering_tree_count(model);
  const auto edges_A = sum_components(model).edges_A;
  std::vector<std::vector<int>> trees;
  for (int count = base; count <= std::max(base, max_trees); count += base) {
    trees = sample_trees(model, count, seed);
    std::vector<bool> used(model.num_edges(), false);
    for (const auto& t : trees) {
      for (int e : t) used[e] = true;
    }
    if (std::all_of(edges_A.begin(), edges_A.end(), [&](int e) { return used[e]; })) break;
  }
  return weights_from_trees(model, std::move(trees), epsilon);
}

nlohmann::json weights_to_json(const PairwiseModel& model, const EntropyWeights& weights) {
  nlohmann::json doc;
  doc["epsilon"] = weights.epsilon();
  doc["rho"] = weights.rho();
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : model.edges()) edges.push_back({e.u, e.v});
  doc["edges"] = edges;
  doc["trees"] = weights.trees;
  if (weights.certificate) {
    doc["certificate"] = {{"kappa_node", weights.certificate->kappa_node},
                          {"kappa_dir", weights.certificate->kappa_dir}};
  }
  return doc;
}

EntropyWeights weights_from_json(const PairwiseModel& model, const nlohmann::json& doc) {
  const auto edges = doc.at("edges");
  if (edges.size() != static_cast<std::size_t>(model.num_edges())) {
    throw InvalidArgument("weights document has a different edge count");
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    if (edges[e][0].get<int>() != model.edge(e).u || edges[e][1].get<int>() != model.edge(e).v) {
      throw InvalidArgument("weights document edge order does not match the model");
    }
  }
  EntropyWeights w(model, doc.at("rho").get<std::vector<double>>(), doc.at("epsilon").get<double>());
  if (doc.contains("trees")) w.trees = doc["trees"].get<std::vector<std::vector<int>>>();
  if (doc.contains("certificate")) {
    ConvexityCertificate c;
    c.kappa_node = doc["certificate"].at("kappa_node").get<std::vector<double>>();
    c.kappa_dir = doc["certificate"].at("kappa_dir").get<std::vector<double>>();
    w.certificate = std::move(c);
  }
  return w;
}

double node_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) h -= xlogx(v);
  return h;
}

double mutual_information(const PairwiseModel& model, const BeliefSet& beliefs, int e) {
  const auto [u, v] = model.edge(e);
  return node_entropy(beliefs.node[u]) + node_entropy(beliefs.node[v]) - node_entropy(beliefs.edge[e]);
}

double belief_energy(const PairwiseModel& model, const BeliefSet& beliefs) {
  double total = 0.0;
  for (int i = 0; i < model.num_vars(); ++i) {
    for (int k = 0; k < model.card(i); ++k) total += weighted_value(beliefs.node[i][k], model.node_logpot(i)[k]);
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto& t = model.edge_logpot(e);
    for (std::size_t k = 0; k < t.size(); ++k) total += weighted_value(beliefs.edge[e][k], t[k]);
  }
  return total;
}

double eval_free_energy_unchecked(const PairwiseModel& model, const BeliefSet& beliefs,
                                  const EntropyWeights& weights) {
  double total = belief_energy(model, beliefs);
  for (int i = 0; i < model.num_vars(); ++i) {
    const double w = weights.w_node(i);
    if (w != 0.0) total += w * node_entropy(beliefs.node[i]);
  }
  for (int e = 0; e < model.num_edges(); ++e) {
    const double w = weights.w_pair(e);
    if (w != 0.0) total -= w * mutual_information(model, beliefs, e);
  }
  return total;
}

double eval_free_energy(const PairwiseModel& model, const BeliefSet& beliefs,
                        const EntropyWeights& weights, double tol) {
  const double r = local_consistency_residual(model, beliefs);
  if (r > tol) {
    throw ConsistencyError("beliefs are not locally consistent (residual " + std::to_string(r) + ")", r);
  }
  return eval_free_energy_unchecked(model, beliefs, weights);
}

BoundResult trw_upper_bound(const PairwiseModel& model, const BeliefSet& beliefs,
                            const EntropyWeights& weights, bool converged, double tol) {
  BoundResult b;
  b.value = eval_free_energy_unchecked(model, beliefs, weights);
  b.consistency_residual = local_consistency_residual(model, beliefs);
  b.valid = converged && b.consistency_residual <= tol;
  return b;
}

}  // namespace mixmap
