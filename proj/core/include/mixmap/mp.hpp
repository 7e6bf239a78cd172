#pragma once

// Belief propagation solvers built on the message kernels.

#include <cstdint>
#include <optional>
#include <vector>

#include "mixmap/beliefs.hpp"
#include "mixmap/free_energy.hpp"
#include "mixmap/messages.hpp"
#include "mixmap/model.hpp"
#include "mixmap/oracle.hpp"
#include "mixmap/report.hpp"

namespace mixmap {

struct SolverOptions {
  int max_iters = 50;
  /// Damped sweeps that follow max_iters when the undamped phase did not converge.
  int extra_damped_iters = 100;
  double damping = 0.1;
  /// Convergence threshold on the largest log-message change in a sweep.
  double tol = 1e-6;
  int num_random_inits = 5;
  bool use_sum_product_init = true;
  std::uint64_t seed = 0;
  EnumerationLimits limits{};
  bool record_trace = true;
  bool compute_residuals = true;

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;
};

/// Scores Max configurations by exact Q when the oracle can, otherwise by the
/// Bethe estimate of the clamped model.
class ConfigScorer {
 public:
  ConfigScorer(const PairwiseModel& model, EnumerationLimits limits);
  bool exact() const { return exact_.has_value(); }
  double operator()(const MaxConfig& x_B) const;
  /// Fills q_exact or q_approx of the report for its decode.
  void annotate(SolveReport& report) const;

 private:
  const PairwiseModel* model_;
  std::optional<QEvaluator> exact_;
};

/// Bethe approximation of Q(x_B): sum-product on the clamped model, then the
/// Bethe free energy of its beliefs.
double approx_q_value(const PairwiseModel& model, const MaxConfig& x_B);

/// Directed edges ordered by (source, target).
std::vector<int> sweep_schedule(const PairwiseModel& model);

struct RunState {
  MessageSet msgs;
  bool converged = false;
  int iterations = 0;
  double last_change = 0.0;
  std::vector<double> trace;
};

struct GenericResult {
  MessageSet msgs;
  BeliefSet beliefs;
  SolveReport report;
};

/// Weighted message passing with fixed weights (all positive).
GenericResult run_generic(const PairwiseModel& model, const EntropyWeights& weights,
                          const SolverOptions& opts, const MessageSet* init = nullptr);

/// A single zero-temperature run from the given messages.
RunState run_mixed_from(const PairwiseModel& model, const std::vector<double>& rho,
                        const SolverOptions& opts, MessageSet init,
                        CrossRule rule = CrossRule::ArgmaxProduct);

/// Decode argmax of psi_i m_~i for every Max node (lowest index on ties).
MaxConfig decode_max_nodes(const PairwiseModel& model, const MessageSet& msgs);

SolveReport run_mixed_product(const PairwiseModel& model, const std::vector<double>& rho,
                              const SolverOptions& opts);
SolveReport run_jiang(const PairwiseModel& model, const std::vector<double>& rho,
                      const SolverOptions& opts);
/// Weighted updates with epsilon_t = 1/t at sweep t.
SolveReport run_annealed(const PairwiseModel& model, const std::vector<double>& rho,
                         const SolverOptions& opts);

struct SumProductResult {
  SolveReport report;
  MessageSet msgs;
};

SumProductResult run_sum_product_full(const PairwiseModel& model, const SolverOptions& opts);
SolveReport run_sum_product(const PairwiseModel& model, const SolverOptions& opts);
SolveReport run_max_product(const PairwiseModel& model, const SolverOptions& opts);

/// max over probes of |log phat(x) - log p(x) - c|, where
/// phat(x) = prod_i b_i prod_ij (b_ij / (b_i b_j))^rho_ij and c is fixed by the
/// first probe with finite log p. Probes are exhaustive when the joint space is
/// under the cap, otherwise `random_probes` seeded draws.
double check_reparameterization(const PairwiseModel& model, const std::vector<double>& rho,
                                const BeliefSet& mixed, EnumerationLimits limits = {},
                                std::uint64_t seed = 0, int random_probes = 1000);

struct ConsistencyResiduals {
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> c;
};

/// Sum-, max- and argmax-consistency residuals of mixed beliefs. Each class is
/// empty when no edge direction of that type exists.
ConsistencyResiduals check_mixed_consistency(const PairwiseModel& model, const BeliefSet& mixed);

/// For each subset C of Max nodes: true iff no change of x_C alone raises Q by more than 1e-9.
std::vector<bool> verify_local_optimality(const PairwiseModel& model, const MaxConfig& x_B,
                                          const std::vector<std::vector<int>>& subsets,
                                          EnumerationLimits limits = {});

/// Multiplies the first entry of the first edge belief by 2 (or the first node
/// belief when there are no edges). Used for defect injection.
BeliefSet perturb_beliefs(const BeliefSet& beliefs);

}  // namespace mixmap
