#include "mixmap/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <utility>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"

namespace mixmap {

namespace {

bool has_finite_entry(const std::vector<double>& t) {
  return std::any_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); });
}

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

}  // namespace

PairwiseModel::PairwiseModel(std::vector<int> cards, std::vector<Role> roles,
                             std::vector<std::vector<double>> node_logpot,
                             std::vector<Edge> edges,
                             std::vector<std::vector<double>> edge_logpot)
    : cards_(std::move(cards)),
      roles_(std::move(roles)),
      node_logpot_(std::move(node_logpot)),
      edges_(std::move(edges)),
      edge_logpot_(std::move(edge_logpot)) {
  validate();
  build_indices();
}

void PairwiseModel::validate() const {
  const std::size_t n = cards_.size();
  if (roles_.size() != n || node_logpot_.size() != n) {
    throw InvalidArgument("cards, roles and node potentials must have equal length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cards_[i] < 1) throw InvalidArgument("variable " + std::to_string(i) + " has cardinality < 1");
    if (node_logpot_[i].size() != static_cast<std::size_t>(cards_[i])) {
      throw InvalidArgument("node potential " + std::to_string(i) + " has wrong length");
    }
    for (double v : node_logpot_[i]) {
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        throw InvalidArgument("node potential " + std::to_string(i) + " has NaN or +inf");
      }
    }
    if (!has_finite_entry(node_logpot_[i])) {
      throw InvalidArgument("node potential " + std::to_string(i) + " is identically zero");
    }
  }
  if (edge_logpot_.size() != edges_.size()) {
    throw InvalidArgument("edge list and edge potentials differ in length");
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [u, v] = edges_[e];
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
      throw InvalidArgument("edge " + std::to_string(e) + " has an out-of-range endpoint");
    }
    if (u == v) throw InvalidArgument("edge " + std::to_string(e) + " is a self-loop");
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
      throw InvalidArgument("duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
    }
    if (edge_logpot_[e].size() != static_cast<std::size_t>(cards_[u]) * cards_[v]) {
      throw InvalidArgument("edge potential " + std::to_string(e) + " has wrong size");
    }
    for (double val : edge_logpot_[e]) {
      if (std::isnan(val) || val == std::numeric_limits<double>::infinity()) {
        throw InvalidArgument("edge potential " + std::to_string(e) + " has NaN or +inf");
      }
    }
    if (!has_finite_entry(edge_logpot_[e])) {
      throw InvalidArgument("edge potential " + std::to_string(e) + " is identically zero");
    }
  }
}

void PairwiseModel::build_indices() {
  const int n = num_vars();
  adj_.assign(n, {});
  max_pos_.assign(n, -1);
  max_nodes_.clear();
  sum_nodes_.clear();
  for (int i = 0; i < n; ++i) {
    if (is_max(i)) {
      max_pos_[i] = static_cast<int>(max_nodes_.size());
      max_nodes_.push_back(i);
    } else {
      sum_nodes_.push_back(i);
    }
  }
  directed_.assign(num_directed(), {});
  for (int e = 0; e < num_edges(); ++e) {
    const auto [u, v] = edges_[e];
    adj_[u].push_back({v, e, 2 * e, 2 * e + 1});
    adj_[v].push_back({u, e, 2 * e + 1, 2 * e});
    directed_[2 * e] = edge_logpot_[e];
    auto& t = directed_[2 * e + 1];
    t.resize(edge_logpot_[e].size());
    for (int a = 0; a < cards_[u]; ++a) {
      for (int b = 0; b < cards_[v]; ++b) {
        t[static_cast<std::size_t>(b) * cards_[u] + a] = edge_value(e, a, b);
      }
    }
  }
  for (auto& list : adj_) {
    std::sort(list.begin(), list.end(),
              [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
  }
}

std::optional<int> PairwiseModel::find_edge(int i, int j) const {
  for (const auto& inc : adj_[i]) {
    if (inc.neighbor == j) return inc.edge;
  }
  return std::nullopt;
}

std::uint64_t PairwiseModel::state_count(const std::vector<int>& vars, std::uint64_t limit) const {
  std::uint64_t count = 1;
  for (int v : vars) {
    count *= static_cast<std::uint64_t>(cards_[v]);
    if (count > limit) return limit + 1;
  }
  return count;
}

PairwiseModel PairwiseModel::with_node_potentials(std::vector<std::vector<double>> node_logpot) const {
  return PairwiseModel(cards_, roles_, std::move(node_logpot), edges_, edge_logpot_);
}

PairwiseModel PairwiseModel::with_roles(std::vector<Role> roles) const {
  return PairwiseModel(cards_, std::move(roles), node_logpot_, edges_, edge_logpot_);
}

double energy(const PairwiseModel& model, const FullConfig& x) {
  if (x.size() != static_cast<std::size_t>(model.num_vars())) {
    throw InvalidConfiguration("configuration length does not match the model");
  }
  for (int i = 0; i < model.num_vars(); ++i) {
    if (x[i] < 0 || x[i] >= model.card(i)) {
      throw InvalidConfiguration("state " + std::to_string(x[i]) + " out of range for variable " +
                                 std::to_string(i));
    }
  }
  double total = 0.0;
  for (int i = 0; i < model.num_vars(); ++i) total += model.node_logpot(i)[x[i]];
  for (int e = 0; e < model.num_edges(); ++e) {
    total += model.edge_value(e, x[model.edge(e).u], x[model.edge(e).v]);
  }
  return total;
}

GraphPartition partition_edges(const PairwiseModel& model) {
  GraphPartition p;
  for (int e = 0; e < model.num_edges(); ++e) {
    const bool mu = model.is_max(model.edge(e).u);
    const bool mv = model.is_max(model.edge(e).v);
    if (mu && mv) {
      p.edges_B.push_back(e);
    } else if (!mu && !mv) {
      p.edges_A.push_back(e);
    } else {
      p.edges_AB.push_back(e);
    }
  }
  return p;
}

bool is_forest(const PairwiseModel& model, const std::vector<bool>& mask) {
  DisjointSets ds(model.num_vars());
  for (int e = 0; e < model.num_edges(); ++e) {
    const auto [u, v] = model.edge(e);
    if (!mask[u] || !mask[v]) continue;
    if (!ds.unite(u, v)) return false;
  }
  return true;
}

AbTreeResult is_ab_tree(const PairwiseModel& model) {
  const int n = model.num_vars();
  AbTreeResult result;
  if (!is_forest(model, std::vector<bool>(n, true))) return result;

  result.parent.assign(n, -1);
  std::vector<int> component(n, -1);
  std::vector<std::vector<int>> members;
  for (int s = 0; s < n; ++s) {
    if (component[s] >= 0) continue;
    const int id = static_cast<int>(members.size());
    members.emplace_back();
    std::vector<int> stack{s};
    component[s] = id;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      members[id].push_back(i);
      for (const auto& inc : model.neighbors(i)) {
        if (component[inc.neighbor] < 0) {
          component[inc.neighbor] = id;
          stack.push_back(inc.neighbor);
        }
      }
    }
  }

  std::vector<int> max_part;
  std::vector<int> sum_part;
  for (auto& comp : members) {
    std::sort(comp.begin(), comp.end());
    int root = comp.front();
    for (int i : comp) {
      if (model.is_max(i)) {
        root = i;
        break;
      }
    }
    std::queue<int> bfs;
    bfs.push(root);
    std::vector<int> visit;
    std::vector<bool> seen(n, false);
    seen[root] = true;
    while (!bfs.empty()) {
      const int i = bfs.front();
      bfs.pop();
      visit.push_back(i);
      for (const auto& inc : model.neighbors(i)) {
        if (seen[inc.neighbor]) continue;
        seen[inc.neighbor] = true;
        result.parent[inc.neighbor] = i;
        if (model.is_sum(i) && model.is_max(inc.neighbor)) return AbTreeResult{};
        bfs.push(inc.neighbor);
      }
    }
    for (int i : visit) (model.is_max(i) ? max_part : sum_part).push_back(i);
  }
  // Max nodes only have Max ancestors, so listing every Max node first keeps parents first.
  result.order = max_part;
  result.order.insert(result.order.end(), sum_part.begin(), sum_part.end());
  result.is_ab_tree = true;
  return result;
}

FullConfig expand_max_config(const PairwiseModel& model, const MaxConfig& x_B) {
  if (x_B.size() != model.max_nodes().size()) {
    throw InvalidConfiguration("Max configuration length does not match the number of Max nodes");
  }
  FullConfig x(model.num_vars(), 0);
  for (std::size_t k = 0; k < x_B.size(); ++k) {
    const int i = model.max_nodes()[k];
    if (x_B[k] < 0 || x_B[k] >= model.card(i)) {
      throw InvalidConfiguration("state " + std::to_string(x_B[k]) + " out of range for variable " +
                                 std::to_string(i));
    }
    x[i] = x_B[k];
  }
  return x;
}

}  // namespace mixmap
