#pragma once

// Exact inference by enumeration and tree elimination. Every approximate
// solver is checked against these routines.

#include <cstdint>
#include <vector>

#include "mixmap/beliefs.hpp"
#include "mixmap/model.hpp"

namespace mixmap {

struct EnumerationLimits {
  std::uint64_t max_states = std::uint64_t{1} << 26;
};

using Marginals = BeliefSet;

struct MapResult {
  FullConfig config;
  double value = 0.0;
};

struct MmapResult {
  MaxConfig config;
  double value = 0.0;
};

struct ExactResult {
  double log_partition = 0.0;
  Marginals marginals;
  FullConfig map_config;
  double map_value = 0.0;
  MaxConfig mmap_config;
  double mmap_value = 0.0;
};

/// Model over the Sum nodes obtained by fixing every Max node.
/// log Q(x_B) = constant + log partition of `model`.
struct ClampedModel {
  PairwiseModel model;
  /// Original index of each variable of `model`.
  std::vector<int> nodes;
  double constant = 0.0;
};

ClampedModel clamp_max_nodes(const PairwiseModel& model, const MaxConfig& x_B);

/// Model induced on the Max nodes, with the supplied unary potentials
/// (indexed like max_nodes()) and the original E_B edge tables.
PairwiseModel induced_max_model(const PairwiseModel& model,
                                const std::vector<std::vector<double>>& unary);

/// Reusable evaluator for Q(x_B) = log sum_{x_A} exp theta(x). Uses
/// two-pass elimination when G_A is a forest and enumeration otherwise.
class QEvaluator {
 public:
  explicit QEvaluator(const PairwiseModel& model, EnumerationLimits limits = {});

  double operator()(const MaxConfig& x_B) const;
  bool uses_elimination() const { return forest_; }
  const PairwiseModel& model() const { return *model_; }

 private:
  struct Cross {
    int max_pos;
    const std::vector<double>* table;  // oriented [x_sum][x_max]
    int card_max;
  };
  struct Step {
    int child;   // position in sum list
    int parent;  // position in sum list
    const std::vector<double>* table;  // oriented [x_child][x_parent]
  };

  const PairwiseModel* model_;
  EnumerationLimits limits_;
  bool forest_ = true;
  std::vector<int> sum_nodes_;
  std::vector<int> offset_;
  std::vector<std::vector<Cross>> cross_;
  std::vector<Step> steps_;
  std::vector<int> roots_;
  std::vector<int> sum_edges_;
};

double q_value(const PairwiseModel& model, const MaxConfig& x_B, EnumerationLimits limits = {});

/// Global optimum of Q by lexicographic enumeration of X_B (first Max node most
/// significant); ties keep the lexicographically smallest configuration.
MmapResult marginal_map_exact(const PairwiseModel& model, EnumerationLimits limits = {});

/// Uses forest elimination when the graph is a forest, enumeration otherwise.
double log_partition_exact(const PairwiseModel& model, EnumerationLimits limits = {});
Marginals marginals_exact(const PairwiseModel& model, EnumerationLimits limits = {});
/// Enumeration under the cap (lexicographic ties); forest max-elimination otherwise.
MapResult map_exact(const PairwiseModel& model, EnumerationLimits limits = {});
ExactResult solve_exact(const PairwiseModel& model, EnumerationLimits limits = {});

/// Pure enumeration versions, used to cross-check the elimination paths.
double log_partition_enumerate(const PairwiseModel& model, EnumerationLimits limits = {});
Marginals marginals_enumerate(const PairwiseModel& model, EnumerationLimits limits = {});

/// epsilon * log sum_{x_B} exp(Q(x_B) / epsilon).
double smoothed_phi(const PairwiseModel& model, double epsilon, EnumerationLimits limits = {});

/// Exact forest routines. All throw InvalidArgument on a graph with a cycle.
double forest_log_partition(const PairwiseModel& model);
Marginals forest_marginals(const PairwiseModel& model);
MapResult forest_map(const PairwiseModel& model);

/// Joint table over all variables, first variable most significant.
struct JointDistribution {
  std::vector<int> cards;
  std::vector<double> p;
};

JointDistribution joint_distribution(const PairwiseModel& model, EnumerationLimits limits = {});
/// tau(x) = 1[x_B = x_B'] p(x_A | x_B').
JointDistribution clamped_distribution(const PairwiseModel& model, const MaxConfig& x_B,
                                       EnumerationLimits limits = {});

double joint_entropy(const JointDistribution& joint);
/// Entropy of the marginal over the variables flagged in `subset`.
double subset_entropy(const JointDistribution& joint, const std::vector<bool>& subset);
/// -sum_x tau(x) log tau(x_A | x_B), computed directly.
double conditional_entropy_exact(const JointDistribution& joint, const std::vector<bool>& is_max);
/// Conditional entropy of the model's own distribution.
double conditional_entropy_exact(const PairwiseModel& model, EnumerationLimits limits = {});
double expected_energy(const PairwiseModel& model, const JointDistribution& joint);
Marginals marginals_of(const PairwiseModel& model, const JointDistribution& joint);
/// <theta, tau> + H_{A|B}(tau).
double dual_objective(const PairwiseModel& model, const JointDistribution& joint);

/// Marginal MAP on an A-B tree by one elimination pass along the witness order.
MmapResult ab_tree_mmap(const PairwiseModel& model, const AbTreeResult& tree);

}  // namespace mixmap
