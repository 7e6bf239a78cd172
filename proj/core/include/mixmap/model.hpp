#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace mixmap {

enum class Role { Sum, Max };

struct Edge {
  int u = 0;
  int v = 0;
};

/// Neighbor entry in an adjacency list. `out` is the directed edge id
/// node -> neighbor and `in` is neighbor -> node.
struct Incidence {
  int neighbor = 0;
  int edge = 0;
  int out = 0;
  int in = 0;
};

/// Assignment to the Max nodes, aligned with PairwiseModel::max_nodes().
using MaxConfig = std::vector<int>;
/// Assignment to every variable.
using FullConfig = std::vector<int>;

/// Pairwise discrete model with a Sum/Max partition of the variables.
///
/// Directed edge ids: 2e is edges[e].u -> edges[e].v, 2e+1 the reverse.
/// Edge tables are stored row-major with shape card(u) x card(v).
class PairwiseModel {
 public:
  PairwiseModel() = default;
  PairwiseModel(std::vector<int> cards, std::vector<Role> roles,
                std::vector<std::vector<double>> node_logpot, std::vector<Edge> edges,
                std::vector<std::vector<double>> edge_logpot);

  int num_vars() const { return static_cast<int>(cards_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int card(int i) const { return cards_[i]; }
  const std::vector<int>& cards() const { return cards_; }
  Role role(int i) const { return roles_[i]; }
  bool is_max(int i) const { return roles_[i] == Role::Max; }
  bool is_sum(int i) const { return roles_[i] == Role::Sum; }
  const std::vector<Role>& roles() const { return roles_; }

  const std::vector<double>& node_logpot(int i) const { return node_logpot_[i]; }
  const std::vector<std::vector<double>>& node_logpots() const { return node_logpot_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& edge_logpot(int e) const { return edge_logpot_[e]; }
  const std::vector<std::vector<double>>& edge_logpots() const { return edge_logpot_; }
  double edge_value(int e, int xu, int xv) const {
    return edge_logpot_[e][static_cast<std::size_t>(xu) * cards_[edges_[e].v] + xv];
  }

  int num_directed() const { return 2 * num_edges(); }
  int source(int d) const { return d % 2 == 0 ? edges_[d / 2].u : edges_[d / 2].v; }
  int target(int d) const { return d % 2 == 0 ? edges_[d / 2].v : edges_[d / 2].u; }
  static int reverse(int d) { return d ^ 1; }
  /// Edge table oriented as [x_source][x_target] for directed edge d.
  const std::vector<double>& directed_table(int d) const { return directed_[d]; }

  const std::vector<Incidence>& neighbors(int i) const { return adj_[i]; }
  /// Edge id joining i and j, if any.
  std::optional<int> find_edge(int i, int j) const;

  const std::vector<int>& max_nodes() const { return max_nodes_; }
  const std::vector<int>& sum_nodes() const { return sum_nodes_; }
  /// Position of node i in max_nodes(), or -1 for Sum nodes.
  int max_position(int i) const { return max_pos_[i]; }

  /// Number of joint states of the listed variables, saturating at `limit + 1`.
  std::uint64_t state_count(const std::vector<int>& vars, std::uint64_t limit) const;

  PairwiseModel with_node_potentials(std::vector<std::vector<double>> node_logpot) const;
  PairwiseModel with_roles(std::vector<Role> roles) const;

 private:
  void validate() const;
  void build_indices();

  std::vector<int> cards_;
  std::vector<Role> roles_;
  std::vector<std::vector<double>> node_logpot_;
  std::vector<Edge> edges_;
  std::vector<std::vector<double>> edge_logpot_;

  std::vector<std::vector<double>> directed_;
  std::vector<std::vector<Incidence>> adj_;
  std::vector<int> max_nodes_;
  std::vector<int> sum_nodes_;
  std::vector<int> max_pos_;
};

struct GraphPartition {
  std::vector<int> edges_A;
  std::vector<int> edges_B;
  std::vector<int> edges_AB;
};

struct AbTreeResult {
  bool is_ab_tree = false;
  /// Roots first; every node appears after its parent.
  std::vector<int> order;
  /// Parent in the witness orientation, -1 for roots.
  std::vector<int> parent;
};

/// Total log-potential of a full configuration. May be -inf.
double energy(const PairwiseModel& model, const FullConfig& x);

GraphPartition partition_edges(const PairwiseModel& model);

AbTreeResult is_ab_tree(const PairwiseModel& model);

/// True iff the subgraph induced by `nodes` (as a mask) is a forest.
bool is_forest(const PairwiseModel& model, const std::vector<bool>& mask);

/// Scatter a Max configuration into a full configuration (Sum entries set to 0).
FullConfig expand_max_config(const PairwiseModel& model, const MaxConfig& x_B);

}  // namespace mixmap
