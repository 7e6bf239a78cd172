#pragma once

// Junction graphs over factor models and mixed-product cluster BP.

#include <vector>

#include "mixmap/factor_model.hpp"
#include "mixmap/mp.hpp"
#include "mixmap/report.hpp"

namespace mixmap {

struct Cluster {
  /// Sorted variable ids.
  std::vector<int> vars;
  /// Sum of assigned factors, over `vars` with the last variable fastest.
  std::vector<double> log_potential;
  std::vector<int> factors;
  /// Max variables hosted by this cluster (subset of vars).
  std::vector<int> pi;
};

struct Separator {
  int a = 0;
  int b = 0;
  std::vector<int> vars;
};

struct JunctionGraph {
  std::vector<int> cards;
  std::vector<Role> roles;
  std::vector<Cluster> clusters;
  std::vector<Separator> separators;
  std::vector<int> elimination_order;

  bool is_max_cluster(int k) const { return !clusters[k].pi.empty(); }
};

enum class EliminationPolicy {
  /// Plain min-fill, ties to the lowest variable index.
  MinFill,
  /// Min-fill restricted to Sum variables while any remain.
  SumFirstMinFill,
};

/// Min-fill triangulation of the moral graph, maximal cliques joined by a
/// maximum-weight spanning tree on intersection sizes. Each factor goes to the
/// first cluster containing its scope; each Max variable to the first cluster
/// (in elimination order) containing it.
JunctionGraph build_junction_graph(const FactorModel& fm,
                                   EliminationPolicy policy = EliminationPolicy::MinFill);

/// For every variable, the clusters containing it and the separators containing
/// it form a tree.
bool check_running_intersection(const JunctionGraph& jg);

/// sum_k theta_{c_k}(x_{c_k}).
double energy(const JunctionGraph& jg, const FullConfig& x);

/// Cluster-graph objective
///   <theta, tau> + sum_{sum clusters} H(c_k) + sum_{max clusters} [H(c_k) - H(pi_k)] - sum_separators H(s).
/// `cluster_beliefs[k]` is over clusters[k].vars and `separator_beliefs[s]` over separators[s].vars.
double jg_dual_objective(const JunctionGraph& jg, const std::vector<std::vector<double>>& cluster_beliefs,
                         const std::vector<std::vector<double>>& separator_beliefs);

/// Cluster and separator marginals of a joint table over all variables
/// (first variable most significant).
void project_joint(const JunctionGraph& jg, const std::vector<double>& joint,
                   std::vector<std::vector<double>>& cluster_beliefs,
                   std::vector<std::vector<double>>& separator_beliefs);

struct JgbpResult {
  SolveReport report;
  /// Normalized cluster beliefs b_k (probability domain).
  std::vector<std::vector<double>> cluster_beliefs;
  /// Decoded value of every variable (Sum variables set to 0).
  FullConfig full_decode;
};

/// Mixed-product junction-graph BP from uniform messages. The report decode is
/// aligned with the Max variables in increasing index order.
JgbpResult run_mixed_jgbp(const JunctionGraph& jg, const SolverOptions& opts);

}  // namespace mixmap
