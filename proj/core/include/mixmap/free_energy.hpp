#pragma once

// Entropy weights and weighted free energies.

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixmap/beliefs.hpp"
#include "mixmap/model.hpp"

namespace mixmap {

/// kappa_node is indexed like max_nodes(); kappa_dir by directed edge id
/// (entries for edges outside E_B are zero).
struct ConvexityCertificate {
  std::vector<double> kappa_node;
  std::vector<double> kappa_dir;
};

/// Pairwise weights rho_ij plus temperature epsilon. Node and pair weights are
/// derived on demand:
///   w_i  = 1 on Sum nodes, epsilon on Max nodes
///   w_ij = rho_ij on E_A and cross edges, epsilon * rho_ij on E_B.
class EntropyWeights {
 public:
  EntropyWeights() = default;
  EntropyWeights(const PairwiseModel& model, std::vector<double> rho, double epsilon);

  double epsilon() const { return epsilon_; }
  double rho(int e) const { return rho_[e]; }
  const std::vector<double>& rho() const { return rho_; }
  double w_node(int i) const { return is_max_[i] ? epsilon_ : 1.0; }
  double w_pair(int e) const { return edge_in_B_[e] ? epsilon_ * rho_[e] : rho_[e]; }

  EntropyWeights with_epsilon(double epsilon) const;

  /// Set for TRW weights: edge ids of each sampled tree.
  std::vector<std::vector<int>> trees;
  std::optional<ConvexityCertificate> certificate;

 private:
  std::vector<double> rho_;
  double epsilon_ = 0.0;
  std::vector<bool> is_max_;
  std::vector<bool> edge_in_B_;
};

EntropyWeights bethe_weights(const PairwiseModel& model, double epsilon = 0.0);

struct ConvexWeightsB {
  /// Indexed by model edge; zero outside E_B.
  std::vector<double> rho;
  ConvexityCertificate certificate;
};

ConvexWeightsB convex_weights_B(const PairwiseModel& model);

/// TRW weights from `num_trees` sampled A-B subtrees: a random spanning forest
/// of G_A plus, per connected component of G_A, one incident cross edge.
/// E_B weights come from convex_weights_B.
EntropyWeights trw_weights(const PairwiseModel& model, int num_trees, std::uint64_t seed,
                           double epsilon = 0.0);

/// Smallest tree count that lets every cross edge appear (the largest number of
/// cross edges incident to one component of G_A), at least 1.
int min_covering_tree_count(const PairwiseModel& model);

/// TRW weights whose rho is positive on every edge: trees are added beyond
/// min_covering_tree_count until each E_A edge has been used (at most `max_trees`).
EntropyWeights trw_weights_covering(const PairwiseModel& model, std::uint64_t seed,
                                    double epsilon = 0.0, int max_trees = 1000);

nlohmann::json weights_to_json(const PairwiseModel& model, const EntropyWeights& weights);
EntropyWeights weights_from_json(const PairwiseModel& model, const nlohmann::json& doc);

/// <theta, tau> + sum_i w_i H_i - sum_ij w_ij I_ij. Throws ConsistencyError when the
/// beliefs violate local consistency by more than `tol`.
double eval_free_energy(const PairwiseModel& model, const BeliefSet& beliefs,
                        const EntropyWeights& weights, double tol = 1e-6);
double eval_free_energy_unchecked(const PairwiseModel& model, const BeliefSet& beliefs,
                                  const EntropyWeights& weights);

double belief_energy(const PairwiseModel& model, const BeliefSet& beliefs);
double node_entropy(const std::vector<double>& p);
/// I_ij = H_i + H_j - H_ij for edge e.
double mutual_information(const PairwiseModel& model, const BeliefSet& beliefs, int e);

struct BoundResult {
  double value = 0.0;
  bool valid = false;
  double consistency_residual = 0.0;
};

/// TRW objective at the given beliefs; valid only when the caller reports
/// convergence and the beliefs are locally consistent within `tol`.
BoundResult trw_upper_bound(const PairwiseModel& model, const BeliefSet& beliefs,
                            const EntropyWeights& weights, bool converged, double tol = 1e-6);

}  // namespace mixmap
