#pragma once

// Algorithm dispatch by name and seeded benchmark sweeps.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixmap/generators.hpp"
#include "mixmap/model.hpp"
#include "mixmap/oracle.hpp"
#include "mixmap/report.hpp"

namespace mixmap {

struct AlgorithmOptions {
  int max_iters = 50;
  int extra_damped_iters = 100;
  double damping = 0.1;
  int num_random_inits = 5;
  std::uint64_t seed = 0;
  EnumerationLimits limits{};
  bool compute_residuals = true;
};

/// sum-product, max-product, mixed-bethe, jiang, annealed-bethe,
/// proximal-bethe, proximal-trw, em, taboo, mixed-jg, exact.
const std::vector<std::string>& algorithm_names();

/// Throws InvalidArgument for an unknown name.
SolveReport run_algorithm(const PairwiseModel& model, const std::string& name, const AlgorithmOptions& opts);

enum class BenchFamily { Hmm, Tree, Grid, UaiFile };
enum class BenchReference { Oracle, BestOfAlgorithms };

struct BenchSpec {
  BenchFamily family = BenchFamily::Hmm;
  /// Node count for hmm and tree, side length for grid.
  int size = 20;
  int card = 3;
  GridPattern pattern = GridPattern::SumLoopy;
  /// Leaf cap for the tree family (negative keeps every leaf Max).
  int max_leaves = -1;
  /// Already-loaded model for the uai-file family.
  PairwiseModel file_model;
  std::vector<double> sigmas;
  int trials = 100;
  std::vector<std::string> algorithms;
  std::uint64_t seed_base = 0;
  BenchReference reference = BenchReference::Oracle;
  int jobs = 1;
  AlgorithmOptions solver;

  /// Defaults to {0.1, 0.2, ..., 2.0}.
  static std::vector<double> default_sigmas();
  void validate() const;
};

struct TrialRecord {
  double sigma = 0.0;
  int trial = 0;
  std::string algorithm;
  double q = 0.0;
  double reference = 0.0;
  bool converged = false;
  /// Valid upper bounds only.
  std::optional<double> bound;
};

struct BenchRow {
  std::string family;
  double sigma = 0.0;
  std::string algorithm;
  int trials = 0;
  double success_rate = 0.0;
  double mean_rel_error = 0.0;
  /// NaN when no trial produced a valid bound.
  double mean_bound_gap = 0.0;
  double converged_rate = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<TrialRecord> records;
};

/// A decode counts as a success when its Q is within this of the reference.
inline constexpr double kSuccessTol = 1e-8;

/// Trial t uses seed seed_base + t for both the model and the solvers.
BenchResult run_bench(const BenchSpec& spec);

std::string family_name(BenchFamily family);
std::string bench_csv(const BenchResult& result);
nlohmann::json bench_json(const BenchSpec& spec, const BenchResult& result);

}  // namespace mixmap
