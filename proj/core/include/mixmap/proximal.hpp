#pragma once

// Proximal point solver: a sequence of reweighted sum-inference problems whose
// Max-node potentials are shifted by lambda^t log tau^t_B.

#include <cstdint>
#include <optional>

#include "mixmap/beliefs.hpp"
#include "mixmap/free_energy.hpp"
#include "mixmap/model.hpp"
#include "mixmap/oracle.hpp"
#include "mixmap/report.hpp"

namespace mixmap {

enum class LambdaSchedule { Constant, Harmonic };
enum class ProximalFlavor { Bethe, Trw };

struct ProximalOptions {
  /// Harmonic sharpens tau_B fast enough to reach integral beliefs within max_outer.
  LambdaSchedule lambda = LambdaSchedule::Harmonic;
  int max_outer = 100;
  int inner_iters = 5;
  int inner_damped_iters = 5;
  double damping = 0.1;
  /// Outer tolerance on max |delta tau_i| over Max nodes (probability domain).
  double tol = 1e-6;
  std::uint64_t seed = 0;
  EnumerationLimits limits{};
  bool record_trace = true;
  bool compute_residuals = true;

  double lambda_at(int t) const { return lambda == LambdaSchedule::Constant ? 1.0 : 1.0 / t; }
  void validate() const;
};

/// Floor applied to log tau before shifting potentials.
inline constexpr double kLogFloor = -1e6;

/// Runs the proximal solver with Bethe (rho = 1) or covering TRW weights.
/// TRW runs also report the upper bound F_trw on the original potentials at
/// the final beliefs.
SolveReport run_proximal(const PairwiseModel& model, ProximalFlavor flavor, const ProximalOptions& opts);

/// Same with caller-supplied pairwise weights (epsilon is ignored).
SolveReport run_proximal(const PairwiseModel& model, const EntropyWeights& weights,
                         const ProximalOptions& opts, bool report_bound);

/// sum_B kappa_i KL[tau_i || prev_i] + sum_{E_B, both directions} kappa_{i->j} KL[tau(x_i|x_j) || prev(x_i|x_j)],
/// the conditional KL taken in expectation under tau_j. Throws InvalidArgument
/// when tau puts mass where prev has none.
double pairwise_proximal_distance(const PairwiseModel& model, const BeliefSet& tau, const BeliefSet& prev,
                                  const ConvexityCertificate& certificate);

}  // namespace mixmap
