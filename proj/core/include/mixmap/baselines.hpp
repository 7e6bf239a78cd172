#pragma once

// Comparison baselines: EM coordinate ascent and taboo local search.

#include <cstdint>
#include <optional>

#include "mixmap/model.hpp"
#include "mixmap/oracle.hpp"
#include "mixmap/report.hpp"

namespace mixmap {

enum class EStep { Exact, SumProductBP };
enum class MStep { Exact, MaxProductBP };

struct EmOptions {
  int max_rounds = 100;
  /// Exact uses forest elimination or enumeration and falls back to BP past the cap.
  EStep e_step = EStep::Exact;
  /// Exact uses enumeration or forest elimination and falls back to max-product past the cap.
  MStep m_step = MStep::Exact;
  int num_random_inits = 5;
  bool use_sum_product_init = true;
  /// When set, this is the only starting point.
  std::optional<MaxConfig> init;
  std::uint64_t seed = 0;
  EnumerationLimits limits{};
};

struct TabooOptions {
  int max_steps = 500;
  int num_random_inits = 5;
  bool use_sequential_init = true;
  std::optional<MaxConfig> init;
  std::uint64_t seed = 0;
  EnumerationLimits limits{};
};

/// Alternates E (Sum-part marginals given x_B) and M (maximize expected
/// potentials over x_B) until x_B repeats. Best of all starts by Q.
SolveReport run_em(const PairwiseModel& model, const EmOptions& opts);

/// Steepest-ascent Hamming-1 search that never revisits a configuration and
/// moves to the best unvisited neighbor even when it is worse. Returns the best
/// configuration seen. Throws ResourceLimitError when Q cannot be evaluated.
SolveReport run_taboo(const PairwiseModel& model, const TabooOptions& opts);

/// Greedy pass over Max nodes in index order: each takes the argmax of its
/// sum-product marginal with the previously fixed Max nodes clamped.
MaxConfig default_sequential_init(const PairwiseModel& model);

}  // namespace mixmap
