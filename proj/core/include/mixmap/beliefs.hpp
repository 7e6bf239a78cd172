#pragma once

#include <vector>

#include "mixmap/model.hpp"

namespace mixmap {

/// Probability-domain node and edge tables. Edge tables are row-major
/// card(u) x card(v) in the model's edge order.
struct BeliefSet {
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> edge;
};

/// Largest violation of normalization and of edge-to-node marginalization.
double local_consistency_residual(const PairwiseModel& model, const BeliefSet& beliefs);

/// Point-mass beliefs at a full configuration.
BeliefSet point_mass_beliefs(const PairwiseModel& model, const FullConfig& x);

/// Product-of-uniform beliefs.
BeliefSet uniform_beliefs(const PairwiseModel& model);

}  // namespace mixmap
